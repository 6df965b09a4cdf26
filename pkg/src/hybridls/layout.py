"""Deterministic layered layout for view graphs.

The layout is a pure function of the graph: nodes are sized bottom-up,
assigned to horizontal layers by breadth-first search over the edge
relation, placed on a grid, and edges are routed as polylines clipped to
node boundaries.  Running it twice on equal graphs yields equal geometry.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass

from .views import GEdge, GGraph, GNode, NODE_INITIAL, NODE_PORT


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> Point:
        return Point(self.x + self.w / 2, self.y + self.h / 2)

    def contains(self, other: Rect, pad: float = 0) -> bool:
        return (
            other.x >= self.x + pad
            and other.y >= self.y + pad
            and other.right <= self.right - pad
            and other.bottom <= self.bottom - pad
        )

    def overlaps(self, other: Rect) -> bool:
        return (
            self.x < other.right
            and other.x < self.right
            and self.y < other.bottom
            and other.y < self.bottom
        )


@dataclass(frozen=True)
class LayoutConfig:
    node_w: float = 120
    node_h: float = 60
    initial_size: float = 16
    gap_x: float = 60
    gap_y: float = 40
    margin: float = 20
    child_pad: float = 10
    title_band: float = 24


DEFAULT_CONFIG = LayoutConfig()


def layout(graph: GGraph, config: LayoutConfig = DEFAULT_CONFIG) -> GGraph:
    """A positioned copy of the graph: every node gains absolute bounds and
    every edge a routed polyline.  The input graph is left untouched."""
    result = copy.deepcopy(graph)
    sizes = {node.id: _size_of(node, config) for node in result.nodes()}
    layers = assign_layers(result)
    _place_rows(result, layers, sizes, config)
    rects = {node.id: node.bounds for node in _all_nodes(result)}
    route_edges(result, rects, config)
    return result


def _all_nodes(graph: GGraph) -> list[GNode]:
    out: list[GNode] = []
    stack = list(reversed(graph.nodes()))
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(node.children))
    return out


# ---------------------------------------------------------------------------
# Sizing

def _port_children(node: GNode) -> list[GNode]:
    return [c for c in node.children if c.kind == NODE_PORT]


def _box_children(node: GNode) -> list[GNode]:
    return [c for c in node.children if c.kind != NODE_PORT]


def _size_of(node: GNode, config: LayoutConfig) -> tuple[float, float]:
    if node.kind == NODE_INITIAL:
        return config.initial_size, config.initial_size
    w, h = config.node_w, config.node_h
    boxes = _box_children(node)
    if boxes:
        child_sizes = [_size_of(c, config) for c in boxes]
        inner_w = config.child_pad + sum(cw + config.child_pad for cw, _ in child_sizes)
        inner_h = config.title_band + max(ch for _, ch in child_sizes) + config.child_pad
        w = max(w, inner_w)
        h = max(h, inner_h)
    ports = _port_children(node)
    if ports:
        # keep port centers at least one port width plus breathing room apart
        w = max(w, (config.initial_size + 4) * (len(ports) + 1))
    return w, h


# ---------------------------------------------------------------------------
# Layering

def assign_layers(graph: GGraph) -> dict[str, int]:
    """Layer index for every top-level node.

    Edges are collapsed to the top-level ancestors of their endpoints.  The
    search starts from the initial pseudo-node when one exists, otherwise
    from all nodes without incoming edges, in element order; nodes left over
    (cycles unreachable from any root) seed further searches below the rows
    assigned so far.
    """
    tops = graph.nodes()
    ancestor: dict[str, str] = {}
    for top in tops:
        stack = [top]
        while stack:
            node = stack.pop()
            ancestor[node.id] = top.id
            stack.extend(node.children)

    adjacency: dict[str, list[str]] = {top.id: [] for top in tops}
    indegree: dict[str, int] = {top.id: 0 for top in tops}
    for edge in graph.edges():
        src = ancestor.get(edge.source_node_id)
        tgt = ancestor.get(edge.target_node_id)
        if src is None or tgt is None or src == tgt:
            continue
        adjacency[src].append(tgt)
        indegree[tgt] += 1

    layers: dict[str, int] = {}

    def bfs(roots: list[str], base: int) -> None:
        queue = deque(roots)
        for node_id in queue:
            layers[node_id] = base
        while queue:
            node_id = queue.popleft()
            for succ in adjacency[node_id]:
                if succ not in layers:
                    layers[succ] = layers[node_id] + 1
                    queue.append(succ)

    initials = [t.id for t in tops if t.kind == NODE_INITIAL]
    if initials:
        bfs(initials, 0)
    else:
        bfs([t.id for t in tops if indegree[t.id] == 0], 0)
    while len(layers) < len(tops):
        base = max(layers.values(), default=-1) + 1
        leftover = next(t.id for t in tops if t.id not in layers)
        bfs([leftover], base)
    return layers


# ---------------------------------------------------------------------------
# Placement

def _place_rows(
    graph: GGraph,
    layers: dict[str, int],
    sizes: dict[str, tuple[float, float]],
    config: LayoutConfig,
) -> None:
    tops = graph.nodes()
    by_layer: dict[int, list[GNode]] = {}
    for node in tops:
        by_layer.setdefault(layers[node.id], []).append(node)

    y = config.margin
    for layer in sorted(by_layer):
        row = by_layer[layer]
        row_h = max(config.node_h, max(sizes[n.id][1] for n in row))
        x = config.margin
        for node in row:
            w, h = sizes[node.id]
            node.bounds = Rect(x, y + (row_h - h) / 2, w, h)
            _place_children(node, sizes, config)
            x += w + config.gap_x
        y += row_h + config.gap_y


def _place_children(node: GNode, sizes: dict[str, tuple[float, float]], config: LayoutConfig) -> None:
    assert node.bounds is not None
    boxes = _box_children(node)
    x = node.bounds.x + config.child_pad
    for child in boxes:
        w, h = sizes[child.id]
        child.bounds = Rect(x, node.bounds.y + config.title_band, w, h)
        _place_children(child, sizes, config)
        x += w + config.child_pad
    ports = _port_children(node)
    size = config.initial_size
    for index, port in enumerate(ports):
        cx = node.bounds.x + node.bounds.w * (index + 1) / (len(ports) + 1)
        port.bounds = Rect(cx - size / 2, node.bounds.y - size / 2, size, size)


# ---------------------------------------------------------------------------
# Routing

def route_edges(graph: GGraph, rects: dict[str, Rect], config: LayoutConfig) -> None:
    groups: dict[frozenset[str], list[GEdge]] = {}
    for edge in graph.edges():
        groups.setdefault(
            frozenset((edge.source_node_id, edge.target_node_id)), []
        ).append(edge)
    for key, edges in groups.items():
        if len(key) == 1:
            node = rects[next(iter(key))]
            for index, edge in enumerate(edges):
                edge.routing_points = _self_loop(node, config.gap_x / 2 + 8 * index)
            continue
        canonical = min(key)
        for index, edge in enumerate(edges):
            offset = 0.0
            if len(edges) > 1:
                offset = 8 * (index // 2 + 1) * (1 if index % 2 == 0 else -1)
            if edge.source_node_id != canonical:
                offset = -offset
            edge.routing_points = _segment(
                rects[edge.source_node_id], rects[edge.target_node_id], offset
            )


def _self_loop(rect: Rect, extent: float) -> list[Point]:
    return [
        Point(rect.right, rect.y + rect.h / 3),
        Point(rect.right + extent, rect.y + rect.h / 3),
        Point(rect.right + extent, rect.y + 2 * rect.h / 3),
        Point(rect.right, rect.y + 2 * rect.h / 3),
    ]


def _segment(source: Rect, target: Rect, offset: float) -> list[Point]:
    a, b = source.center, target.center
    dx, dy = b.x - a.x, b.y - a.y
    length = (dx * dx + dy * dy) ** 0.5
    if length == 0:
        return [a, b]
    if offset:
        px, py = -dy / length * offset, dx / length * offset
        a = Point(a.x + px, a.y + py)
        b = Point(b.x + px, b.y + py)
    start = _clip_to_boundary(a, b, source)
    end = _clip_to_boundary(b, a, target)
    return [start, end]


def _clip_to_boundary(inside: Point, outside: Point, rect: Rect) -> Point:
    """Where the ray from ``inside`` towards ``outside`` leaves the rect."""
    dx, dy = outside.x - inside.x, outside.y - inside.y
    t = 1.0
    if dx != 0:
        t = min(t, max((rect.x - inside.x) / dx, (rect.right - inside.x) / dx))
    if dy != 0:
        t = min(t, max((rect.y - inside.y) / dy, (rect.bottom - inside.y) / dy))
    t = max(t, 0.0)
    return Point(inside.x + t * dx, inside.y + t * dy)
