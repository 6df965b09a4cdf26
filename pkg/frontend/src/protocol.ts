/** Wire formats of the two server endpoints.
 *
 * The graph endpoint speaks plain JSON-RPC, one message per WebSocket
 * frame.  The textual endpoint speaks the Content-Length framed protocol,
 * bridged over WebSocket with one framed message per frame.  Everything
 * here mirrors the server's encoders; the client adds nothing.
 */

export interface Bounds {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface RoutePoint {
  x: number;
  y: number;
}

export interface GraphNode {
  id: string;
  sourceId: string;
  type: string;
  label: string;
  bounds: Bounds;
  children: GraphNode[];
  drillTarget?: string;
}

export interface GraphEdge {
  id: string;
  sourceId: string;
  type: string;
  sourceNodeId: string;
  targetNodeId: string;
  label: string;
  routingPoints: RoutePoint[];
}

export type GraphElement = GraphNode | GraphEdge;

export interface Graph {
  viewId: string;
  revision: number;
  elements: GraphElement[];
}

export function isNode(element: GraphElement): element is GraphNode {
  return "bounds" in element;
}

/** Nodes at every nesting depth plus edges; the diagram renderer emits
 * exactly one DOM carrier per counted element. */
export function elementCount(graph: Graph): number {
  let count = 0;
  const walk = (nodes: GraphNode[]): void => {
    for (const node of nodes) {
      count += 1;
      walk(node.children);
    }
  };
  walk(graph.elements.filter(isNode));
  return count + graph.elements.filter((e) => !isNode(e)).length;
}

export interface ViewDescriptor {
  viewId: string;
  title: string;
  category: string;
}

export interface PaletteArgument {
  name: string;
  type: string; // identifier | elementRef | text
}

export interface PaletteItem {
  operation: string;
  label: string;
  argumentSchema: PaletteArgument[];
}

export interface Operation {
  kind: string;
  target: string;
  payload: Record<string, unknown>;
}

export interface OperationResult {
  accepted: boolean;
  revision: number;
  diagnostics: Diagnostic[];
}

export interface Position {
  line: number;
  character: number;
}

export interface Range {
  start: Position;
  end: Position;
}

export interface Diagnostic {
  code: string;
  severity: number | string;
  message: string;
  span?: { start: number; end: number };
  range?: Range;
  source?: string;
}

export interface RpcError {
  code: number;
  message: string;
  data?: unknown;
}

export interface RpcMessage {
  jsonrpc: "2.0";
  id?: number | string;
  method?: string;
  params?: any;
  result?: any;
  error?: RpcError;
}

/** The element that a view's additive operations act on, derived from the
 * view id per the server's element id scheme.  Analysis views are
 * read-only and have no container. */
export function viewContainerTarget(viewId: string, modelName: string): string {
  if (viewId === "root") {
    return `model:${modelName}`;
  }
  const colon = viewId.indexOf(":");
  const category = viewId.slice(0, colon);
  const rest = viewId.slice(colon + 1);
  if (category === "structure") {
    return `capsule:${rest}`;
  }
  if (category === "behavior") {
    const [qname, ...path] = rest.split("/");
    return path.length ? `state:${qname}.sm.${path.join(".")}` : `sm:${qname}.sm`;
  }
  throw new Error(`view has no mutation container: ${viewId}`);
}

// --- Content-Length framing ------------------------------------------------

export function frameMessage(message: unknown): string {
  const body = JSON.stringify(message);
  const length = new TextEncoder().encode(body).length;
  return `Content-Length: ${length}\r\n\r\n${body}`;
}

/** Decodes one framed message.  The bridge guarantees exactly one message
 * per WebSocket frame, so the header only needs to be validated, not used
 * to find the body boundary. */
export function unframeMessage(data: string): RpcMessage {
  const split = data.indexOf("\r\n\r\n");
  if (split < 0) {
    throw new Error("framed message without header terminator");
  }
  if (!/content-length\s*:\s*\d+/i.test(data.slice(0, split))) {
    throw new Error("framed message without Content-Length header");
  }
  return JSON.parse(data.slice(split + 4)) as RpcMessage;
}

// --- text positions --------------------------------------------------------

/** Offset of a protocol position in a JS string.  Protocol characters are
 * UTF-16 code units, which is exactly what JS string indices count.  The
 * character is clamped to the line's content, excluding the line break. */
export function offsetAt(text: string, position: Position): number {
  let offset = 0;
  for (let line = 0; line < position.line; line += 1) {
    const next = text.indexOf("\n", offset);
    if (next < 0) {
      return text.length;
    }
    offset = next + 1;
  }
  let lineEnd = text.indexOf("\n", offset);
  if (lineEnd < 0) {
    lineEnd = text.length;
  } else if (lineEnd > offset && text[lineEnd - 1] === "\r") {
    lineEnd -= 1;
  }
  return Math.min(offset + position.character, lineEnd);
}

export function applyRangeEdit(text: string, range: Range, newText: string): string {
  const start = offsetAt(text, range.start);
  const end = offsetAt(text, range.end);
  return text.slice(0, start) + newText + text.slice(end);
}
