"""Static vector rendering of positioned view graphs.

Output is deterministic: element order follows the graph, numbers are
formatted through one canonical function, and no timestamps or generated
identifiers appear.  States are rounded rectangles, the initial pseudo-
state is a filled circle, ports are small squares on their parent's border,
and edges are arrow-terminated paths with their label above the midpoint.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .layout import Rect
from .views import (
    GGraph,
    GNode,
    NODE_COMPOSITE,
    NODE_INITIAL,
    NODE_PORT,
    NODE_STATE,
    walk_nodes,
)

FONT = 'font-family="monospace" font-size="12"'
MARGIN = 20


def _fmt(value: float) -> str:
    return f"{value:g}"


def _canvas_size(graph: GGraph) -> tuple[float, float]:
    width = height = 0.0
    for node in walk_nodes(graph):
        if node.bounds is not None:
            width = max(width, node.bounds.right)
            height = max(height, node.bounds.bottom)
    for edge in graph.edges():
        for point in edge.routing_points:
            width = max(width, point.x)
            height = max(height, point.y)
    return width + MARGIN, height + MARGIN


def _node_svg(node: GNode, out: list[str]) -> None:
    rect = node.bounds or Rect(0, 0, 0, 0)
    x, y, w, h = _fmt(rect.x), _fmt(rect.y), _fmt(rect.w), _fmt(rect.h)
    if node.kind == NODE_INITIAL:
        out.append(
            f'<circle cx="{_fmt(rect.center.x)}" cy="{_fmt(rect.center.y)}" '
            f'r="{_fmt(rect.w / 2)}" fill="black"/>'
        )
    elif node.kind in (NODE_STATE, NODE_COMPOSITE):
        out.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{h}" rx="8" '
            'fill="white" stroke="black"/>'
        )
    elif node.kind == NODE_PORT:
        out.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{h}" '
            'fill="white" stroke="black"/>'
        )
    else:
        out.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{h}" '
            'fill="white" stroke="black"/>'
        )
    if node.label:
        if node.children:
            tx, ty = rect.center.x, rect.y + 14
        else:
            tx, ty = rect.center.x, rect.center.y
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" text-anchor="middle" '
            f'dominant-baseline="middle" {FONT}>{escape(node.label)}</text>'
        )
    for child in node.children:
        _node_svg(child, out)


def render_svg(graph: GGraph) -> str:
    """The graph as a standalone vector-graphics document."""
    width, height = _canvas_size(graph)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        "<defs>"
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="8" markerHeight="8" orient="auto-start-reverse">'
        '<polygon points="0 0 10 5 0 10" fill="black"/>'
        "</marker>"
        "</defs>",
    ]
    for node in graph.nodes():
        _node_svg(node, out)
    for edge in graph.edges():
        points = edge.routing_points
        if len(points) < 2:
            continue
        steps = " ".join(
            f"{'M' if i == 0 else 'L'} {_fmt(p.x)} {_fmt(p.y)}"
            for i, p in enumerate(points)
        )
        out.append(
            f'<path d="{steps}" fill="none" stroke="black" marker-end="url(#arrow)"/>'
        )
        if edge.label:
            a = points[(len(points) - 1) // 2]
            b = points[(len(points) + 1) // 2]
            mx, my = (a.x + b.x) / 2, (a.y + b.y) / 2
            out.append(
                f'<text x="{_fmt(mx)}" y="{_fmt(my - 4)}" text-anchor="middle" '
                f"{FONT}>{escape(edge.label)}</text>"
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
