/** Projects a server-positioned graph into an SVG DOM subtree.

The client performs no layout: every rectangle is drawn at the server's
bounds and every edge along the server's routing points.  Each graph
element becomes exactly one ``data-graph-id`` carrier group, so DOM counts
mirror graph element counts.  Nodes carrying a drill target get the
``drillable`` class and fire the drill handler on double click.
*/

import { isNode, type Graph, type GraphEdge, type GraphNode } from "./protocol.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const MARGIN = 20;
const ROUNDED = new Set(["stateNode", "compositeStateNode"]);

export interface DiagramHandlers {
  onDrill?(node: GraphNode): void;
  onSelect?(element: GraphNode | GraphEdge): void;
}

export function renderGraph(
  graph: Graph | null,
  container: Element,
  handlers: DiagramHandlers = {},
): void {
  container.replaceChildren();
  if (graph === null) {
    return;
  }
  try {
    container.appendChild(buildSvg(graph, handlers));
  } catch (error) {
    console.error("not a renderable graph", error);
    container.replaceChildren();
  }
}

function buildSvg(graph: Graph, handlers: DiagramHandlers): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  const [width, height] = canvasSize(graph);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.appendChild(arrowDefs());
  for (const element of graph.elements) {
    if (isNode(element)) {
      appendNode(svg, element, handlers);
    }
  }
  for (const element of graph.elements) {
    if (!isNode(element)) {
      appendEdge(svg, element, handlers);
    }
  }
  return svg;
}

function canvasSize(graph: Graph): [number, number] {
  let maxX = 0;
  let maxY = 0;
  const visit = (node: GraphNode): void => {
    maxX = Math.max(maxX, node.bounds.x + node.bounds.w);
    maxY = Math.max(maxY, node.bounds.y + node.bounds.h);
    node.children.forEach(visit);
  };
  for (const element of graph.elements) {
    if (isNode(element)) {
      visit(element);
    } else {
      for (const point of element.routingPoints) {
        maxX = Math.max(maxX, point.x);
        maxY = Math.max(maxY, point.y);
      }
    }
  }
  return [maxX + MARGIN, maxY + MARGIN];
}

function arrowDefs(): SVGElement {
  const defs = document.createElementNS(SVG_NS, "defs");
  const marker = document.createElementNS(SVG_NS, "marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("viewBox", "0 0 10 10");
  marker.setAttribute("refX", "9");
  marker.setAttribute("refY", "5");
  marker.setAttribute("markerWidth", "8");
  marker.setAttribute("markerHeight", "8");
  marker.setAttribute("orient", "auto-start-reverse");
  const tip = document.createElementNS(SVG_NS, "polygon");
  tip.setAttribute("points", "0 0 10 5 0 10");
  tip.setAttribute("fill", "black");
  marker.appendChild(tip);
  defs.appendChild(marker);
  return defs;
}

function appendNode(svg: SVGSVGElement, node: GraphNode, handlers: DiagramHandlers): void {
  const group = document.createElementNS(SVG_NS, "g");
  group.setAttribute("data-graph-id", node.id);
  group.setAttribute("data-source-id", node.sourceId);
  group.setAttribute("class", `node ${node.type}`);

  const { x, y, w, h } = node.bounds;
  if (node.type === "initialNode") {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(x + w / 2));
    circle.setAttribute("cy", String(y + h / 2));
    circle.setAttribute("r", String(w / 2));
    circle.setAttribute("fill", "black");
    group.appendChild(circle);
  } else {
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(x));
    rect.setAttribute("y", String(y));
    rect.setAttribute("width", String(w));
    rect.setAttribute("height", String(h));
    if (ROUNDED.has(node.type)) {
      rect.setAttribute("rx", "8");
    }
    rect.setAttribute("fill", "white");
    rect.setAttribute("stroke", "black");
    group.appendChild(rect);
  }

  if (node.label) {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(x + w / 2));
    // containers keep their title in the top band, leaves center it
    text.setAttribute("y", String(node.children.length ? y + 14 : y + h / 2));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("dominant-baseline", "middle");
    text.textContent = node.label;
    group.appendChild(text);
  }

  if (node.drillTarget !== undefined) {
    group.classList.add("drillable");
    group.addEventListener("dblclick", () => handlers.onDrill?.(node));
  }
  group.addEventListener("click", () => handlers.onSelect?.(node));
  svg.appendChild(group);

  for (const child of node.children) {
    appendNode(svg, child, handlers);
  }
}

function appendEdge(svg: SVGSVGElement, edge: GraphEdge, handlers: DiagramHandlers): void {
  const group = document.createElementNS(SVG_NS, "g");
  group.setAttribute("data-graph-id", edge.id);
  group.setAttribute("data-source-id", edge.sourceId);
  group.setAttribute("class", `edge ${edge.type}`);

  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", edge.routingPoints.map((p) => `${p.x},${p.y}`).join(" "));
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "black");
  line.setAttribute("marker-end", "url(#arrow)");
  group.appendChild(line);

  if (edge.label && edge.routingPoints.length >= 2) {
    const mid = Math.floor(edge.routingPoints.length / 2);
    const a = edge.routingPoints[mid - 1];
    const b = edge.routingPoints[mid];
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String((a.x + b.x) / 2));
    text.setAttribute("y", String((a.y + b.y) / 2 - 4));
    text.setAttribute("text-anchor", "middle");
    text.textContent = edge.label;
    group.appendChild(text);
  }
  group.addEventListener("click", () => handlers.onSelect?.(edge));
  svg.appendChild(group);
}
