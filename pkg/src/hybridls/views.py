"""Graphical projections of RT-lite models.

A view renders only elements in a direct containment relation with the
viewed element; nested content is reached by drilling down into a new view.
Four view categories exist:

  root                      protocols and capsules of the model
  structure:<capsule>       ports, parts and connectors of one capsule
  behavior:<capsule>[/s...] one region of the capsule's state machine
  analysis:reachtree:<c>    breadth-first unfolding of the top region

Graph element ids are the model element ids except where one element occurs
several times in a graph; occurrences then carry an ``@`` suffix and
``source_of`` maps them back (many-to-one) to the model element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .errors import AnalysisUnavailable, MalformedInput, UnknownView
from .model import (
    KIND_CAPSULE,
    KIND_CONNECTOR,
    KIND_INITIAL,
    KIND_PART,
    KIND_PORT,
    KIND_PROTOCOL,
    KIND_STATE,
    KIND_TRANS,
    SM_SEGMENT,
    CapsuleDecl,
    ElementId,
    Model,
    Region,
    element_id_of,
    find_capsule,
    find_state,
    transition_label,
)
from .mutations import (
    ADD_CAPSULE,
    ADD_COMPOSITE_STATE,
    ADD_CONNECTOR,
    ADD_PART,
    ADD_PORT,
    ADD_PROTOCOL,
    ADD_STATE,
    ADD_TRANSITION,
    DELETE,
    RENAME,
    SET_INITIAL,
    SET_TRANSITION_ACTION,
    SET_TRANSITION_GUARD,
    SET_TRANSITION_TRIGGER,
)

if TYPE_CHECKING:
    from .layout import Rect

ViewId = str

CATEGORY_ROOT = "root"
CATEGORY_STRUCTURE = "structure"
CATEGORY_BEHAVIOR = "behavior"
CATEGORY_ANALYSIS = "analysis"

NODE_CAPSULE = "capsuleNode"
NODE_PART = "partNode"
NODE_PORT = "portNode"
NODE_PROTOCOL = "protocolNode"
NODE_STATE = "stateNode"
NODE_COMPOSITE = "compositeStateNode"
NODE_INITIAL = "initialNode"

EDGE_TRANSITION = "transitionEdge"
EDGE_CONNECTOR = "connectorEdge"
EDGE_INITIAL = "initialEdge"
EDGE_UNFOLD = "unfoldEdge"

DEFAULT_REACH_DEPTH = 8


@dataclass
class GNode:
    id: str
    source_id: ElementId
    kind: str
    label: str
    children: list[GNode] = field(default_factory=list)
    drill_target: ViewId | None = None
    bounds: Rect | None = None


@dataclass
class GEdge:
    id: str
    source_id: ElementId
    kind: str
    source_node_id: str
    target_node_id: str
    label: str = ""
    routing_points: list = field(default_factory=list)


@dataclass
class GGraph:
    view_id: ViewId
    revision: int
    elements: list[GNode | GEdge] = field(default_factory=list)

    def nodes(self) -> list[GNode]:
        return [e for e in self.elements if isinstance(e, GNode)]

    def edges(self) -> list[GEdge]:
        return [e for e in self.elements if isinstance(e, GEdge)]


def walk_nodes(graph: GGraph):
    """Every node of the graph, parents before children."""
    stack = list(reversed(graph.nodes()))
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def element_count(graph: GGraph) -> int:
    """Total number of graph elements, nested children included."""
    return sum(1 for _ in walk_nodes(graph)) + len(graph.edges())


def source_of(graph: GGraph, graph_id: str) -> ElementId:
    """The model element behind a graph-local id."""
    for node in walk_nodes(graph):
        if node.id == graph_id:
            return node.source_id
    for edge in graph.edges():
        if edge.id == graph_id:
            return edge.source_id
    raise MalformedInput(f"graph has no element {graph_id!r}")


@dataclass(frozen=True)
class ViewDescriptor:
    view_id: ViewId
    title: str
    category: str


@dataclass(frozen=True)
class PaletteItem:
    operation_kind: str
    label: str
    # (field name, field type) pairs; types are identifier | elementRef | text
    argument_schema: tuple[tuple[str, str], ...]


# ---------------------------------------------------------------------------
# View ids

@dataclass(frozen=True)
class ParsedViewId:
    category: str
    capsule_qname: str | None = None  # dotted, e.g. "M.C"
    state_path: tuple[str, ...] = ()


def parse_view_id(view_id: ViewId) -> ParsedViewId:
    if view_id == CATEGORY_ROOT:
        return ParsedViewId(CATEGORY_ROOT)
    category, sep, rest = view_id.partition(":")
    if not sep or not rest:
        raise UnknownView(f"malformed view id: {view_id!r}")
    if category == CATEGORY_STRUCTURE:
        return ParsedViewId(CATEGORY_STRUCTURE, rest)
    if category == CATEGORY_BEHAVIOR:
        qname, *path = rest.split("/")
        return ParsedViewId(CATEGORY_BEHAVIOR, qname, tuple(path))
    if category == CATEGORY_ANALYSIS:
        sub, sep, qname = rest.partition(":")
        if sub != "reachtree" or not sep or not qname:
            raise UnknownView(f"malformed view id: {view_id!r}")
        return ParsedViewId(CATEGORY_ANALYSIS, qname)
    raise UnknownView(f"malformed view id: {view_id!r}")


def view_category(view_id: ViewId) -> str:
    return parse_view_id(view_id).category


def _capsule_qname(model: Model, capsule: CapsuleDecl) -> str:
    return f"{model.name}.{capsule.name}"


def _resolve_capsule(model: Model, qname: str) -> CapsuleDecl:
    parts = qname.split(".")
    if len(parts) != 2 or parts[0] != model.name:
        raise UnknownView(f"no capsule {qname!r} in this model")
    capsule = find_capsule(model, parts[1])
    if capsule is None:
        raise UnknownView(f"no capsule {qname!r} in this model")
    return capsule


def _resolve_region(capsule: CapsuleDecl, path: tuple[str, ...], view_id: ViewId) -> Region:
    if capsule.machine is None:
        raise UnknownView(f"capsule has no state machine: {view_id!r}")
    region = capsule.machine.region
    for name in path:
        state = find_state(region, name)
        if state is None or state.region is None:
            raise UnknownView(f"no composite state {name!r} in {view_id!r}")
        region = state.region
    return region


# ---------------------------------------------------------------------------
# View enumeration

def list_views(model: Model) -> list[ViewDescriptor]:
    """Every available view: the root view first, then per capsule (in
    declaration order) its structure view, behavior views in pre-order and,
    when the machine has a resolvable initial state, its reach-tree view."""
    views = [ViewDescriptor(CATEGORY_ROOT, f"Model {model.name}", CATEGORY_ROOT)]
    for capsule in model.capsules:
        qname = _capsule_qname(model, capsule)
        views.append(
            ViewDescriptor(
                f"{CATEGORY_STRUCTURE}:{qname}",
                f"{capsule.name} structure",
                CATEGORY_STRUCTURE,
            )
        )
        if capsule.machine is not None:
            views.extend(_behavior_views(capsule, qname, capsule.machine.region, ()))
            region = capsule.machine.region
            if region.initial is not None and find_state(region, region.initial.target_name):
                views.append(
                    ViewDescriptor(
                        f"{CATEGORY_ANALYSIS}:reachtree:{qname}",
                        f"{capsule.name} reach tree",
                        CATEGORY_ANALYSIS,
                    )
                )
    return views


def _behavior_views(
    capsule: CapsuleDecl, qname: str, region: Region, path: tuple[str, ...]
) -> list[ViewDescriptor]:
    suffix = "".join(f"/{name}" for name in path)
    title_path = "/".join((capsule.name,) + path)
    views = [
        ViewDescriptor(
            f"{CATEGORY_BEHAVIOR}:{qname}{suffix}",
            f"{title_path} behavior",
            CATEGORY_BEHAVIOR,
        )
    ]
    for state in region.states:
        if state.region is not None:
            views.extend(
                _behavior_views(capsule, qname, state.region, path + (state.name,))
            )
    return views


# ---------------------------------------------------------------------------
# Rendering

def render(
    model: Model,
    view_id: ViewId,
    *,
    revision: int = 0,
    max_depth: int = DEFAULT_REACH_DEPTH,
) -> GGraph:
    """The unpositioned graph for one view of the model.

    Rendering is defensive about dangling names: edges whose endpoints do
    not resolve are omitted (the names are already reported as diagnostics).
    """
    parsed = parse_view_id(view_id)
    graph = GGraph(view_id, revision)
    if parsed.category == CATEGORY_ROOT:
        _render_root(model, graph)
    elif parsed.category == CATEGORY_STRUCTURE:
        _render_structure(model, _resolve_capsule(model, parsed.capsule_qname), graph)
    elif parsed.category == CATEGORY_BEHAVIOR:
        capsule = _resolve_capsule(model, parsed.capsule_qname)
        region = _resolve_region(capsule, parsed.state_path, view_id)
        _render_behavior(model, capsule, region, parsed.state_path, graph)
    else:
        _render_reach_tree(model, parsed.capsule_qname, graph, max_depth)
    return graph


def _render_root(model: Model, graph: GGraph) -> None:
    for proto in model.protocols:
        proto_id = element_id_of(KIND_PROTOCOL, [model.name, proto.name])
        graph.elements.append(GNode(proto_id, proto_id, NODE_PROTOCOL, proto.name))
    for capsule in model.capsules:
        cap_id = element_id_of(KIND_CAPSULE, [model.name, capsule.name])
        graph.elements.append(
            GNode(
                cap_id,
                cap_id,
                NODE_CAPSULE,
                capsule.name,
                drill_target=f"{CATEGORY_STRUCTURE}:{_capsule_qname(model, capsule)}",
            )
        )


def _port_label(port) -> str:
    return f"{port.name}~" if port.conjugated else port.name


def _render_structure(model: Model, capsule: CapsuleDecl, graph: GGraph) -> None:
    cap_path = [model.name, capsule.name]
    cap_id = element_id_of(KIND_CAPSULE, cap_path)
    frame = GNode(
        cap_id,
        cap_id,
        NODE_CAPSULE,
        capsule.name,
        drill_target=f"{CATEGORY_STRUCTURE}:{_capsule_qname(model, capsule)}",
    )
    port_nodes: dict[str, str] = {}  # ref text -> graph id
    for port in capsule.ports:
        port_id = element_id_of(KIND_PORT, cap_path + [port.name])
        node = GNode(port_id, port_id, NODE_PORT, _port_label(port))
        frame.children.append(node)
        port_nodes[port.name] = port_id
    graph.elements.append(frame)

    for part in capsule.parts:
        part_id = element_id_of(KIND_PART, cap_path + [part.name])
        node = GNode(part_id, part_id, NODE_PART, f"{part.name} : {part.capsule_name}")
        target = find_capsule(model, part.capsule_name)
        if target is not None:
            node.drill_target = f"{CATEGORY_STRUCTURE}:{_capsule_qname(model, target)}"
            for port in target.ports:
                base = element_id_of(KIND_PORT, [model.name, target.name, port.name])
                child = GNode(
                    f"{base}@{part.name}", base, NODE_PORT, _port_label(port)
                )
                node.children.append(child)
                port_nodes[f"{part.name}.{port.name}"] = child.id
        graph.elements.append(node)

    for index, conn in enumerate(capsule.connectors):
        conn_id = element_id_of(KIND_CONNECTOR, cap_path + [f"c{index}"])
        end_a = port_nodes.get(conn.end_a.text())
        end_b = port_nodes.get(conn.end_b.text())
        if end_a is None or end_b is None:
            continue
        graph.elements.append(
            GEdge(conn_id, conn_id, EDGE_CONNECTOR, end_a, end_b)
        )


def _render_behavior(
    model: Model,
    capsule: CapsuleDecl,
    region: Region,
    path: tuple[str, ...],
    graph: GGraph,
) -> None:
    region_path = [model.name, capsule.name, SM_SEGMENT, *path]
    view_base = f"{CATEGORY_BEHAVIOR}:{model.name}.{capsule.name}" + "".join(
        f"/{name}" for name in path
    )
    if region.initial is not None:
        initial_id = element_id_of(KIND_INITIAL, region_path)
        graph.elements.append(GNode(initial_id, initial_id, NODE_INITIAL, ""))
    for state in region.states:
        state_id = element_id_of(KIND_STATE, region_path + [state.name])
        if state.region is not None:
            graph.elements.append(
                GNode(
                    state_id,
                    state_id,
                    NODE_COMPOSITE,
                    state.name,
                    drill_target=f"{view_base}/{state.name}",
                )
            )
        else:
            graph.elements.append(GNode(state_id, state_id, NODE_STATE, state.name))
    if region.initial is not None and find_state(region, region.initial.target_name):
        initial_id = element_id_of(KIND_INITIAL, region_path)
        graph.elements.append(
            GEdge(
                f"{initial_id}@edge",
                initial_id,
                EDGE_INITIAL,
                initial_id,
                element_id_of(KIND_STATE, region_path + [region.initial.target_name]),
            )
        )
    counts: dict[tuple[str, str], int] = {}
    for trans in region.transitions:
        key = (trans.source_name, trans.target_name)
        ordinal = counts.get(key, 0)
        counts[key] = ordinal + 1
        if not find_state(region, trans.source_name) or not find_state(
            region, trans.target_name
        ):
            continue
        trans_id = element_id_of(
            KIND_TRANS, region_path + [trans.source_name, trans.target_name], ordinal
        )
        graph.elements.append(
            GEdge(
                trans_id,
                trans_id,
                EDGE_TRANSITION,
                element_id_of(KIND_STATE, region_path + [trans.source_name]),
                element_id_of(KIND_STATE, region_path + [trans.target_name]),
                transition_label(trans),
            )
        )


# ---------------------------------------------------------------------------
# Reach tree

def reach_tree(model: Model, capsule_qname: str, max_depth: int = DEFAULT_REACH_DEPTH) -> GGraph:
    """Breadth-first unfolding of the top region's transition relation.

    Starting at the initial state, every outgoing transition of a reached
    state spawns a fresh occurrence of its target, so states revisited along
    different paths appear once per visit.  Composite states are treated as
    atomic.  Occurrence numbers count nodes in BFS creation order.
    """
    graph = GGraph(f"{CATEGORY_ANALYSIS}:reachtree:{capsule_qname}", 0)
    _render_reach_tree(model, capsule_qname, graph, max_depth)
    return graph


def _render_reach_tree(
    model: Model, capsule_qname: str, graph: GGraph, max_depth: int
) -> None:
    if max_depth < 0:
        raise MalformedInput("reach tree depth must be non-negative")
    capsule = _resolve_capsule(model, capsule_qname)
    if capsule.machine is None:
        raise AnalysisUnavailable(f"capsule '{capsule.name}' has no state machine")
    region = capsule.machine.region
    if region.initial is None or not find_state(region, region.initial.target_name):
        raise AnalysisUnavailable(
            f"capsule '{capsule.name}' has no resolvable initial state"
        )
    region_path = [model.name, capsule.name, SM_SEGMENT]

    def state_id(name: str) -> ElementId:
        return element_id_of(KIND_STATE, region_path + [name])

    outgoing: dict[str, list[tuple[ElementId, object]]] = {}
    counts: dict[tuple[str, str], int] = {}
    for trans in region.transitions:
        key = (trans.source_name, trans.target_name)
        ordinal = counts.get(key, 0)
        counts[key] = ordinal + 1
        if not find_state(region, trans.source_name) or not find_state(
            region, trans.target_name
        ):
            continue
        trans_id = element_id_of(
            KIND_TRANS, region_path + [trans.source_name, trans.target_name], ordinal
        )
        outgoing.setdefault(trans.source_name, []).append((trans_id, trans))

    nodes: list[GNode] = []
    edges: list[GEdge] = []
    root_name = region.initial.target_name
    root = GNode(f"{state_id(root_name)}@0", state_id(root_name), NODE_STATE, root_name)
    nodes.append(root)
    frontier = [(root_name, root.id)]
    occurrence = 1
    for _ in range(max_depth):
        if not frontier:
            break
        next_frontier: list[tuple[str, str]] = []
        for name, node_id in frontier:
            for trans_id, trans in outgoing.get(name, []):
                target = trans.target_name
                new_node = GNode(
                    f"{state_id(target)}@{occurrence}", state_id(target), NODE_STATE, target
                )
                nodes.append(new_node)
                edges.append(
                    GEdge(
                        f"{trans_id}@{occurrence}",
                        trans_id,
                        EDGE_UNFOLD,
                        node_id,
                        new_node.id,
                        transition_label(trans),
                    )
                )
                next_frontier.append((target, new_node.id))
                occurrence += 1
        frontier = next_frontier
    graph.elements.extend(nodes)
    graph.elements.extend(edges)


# ---------------------------------------------------------------------------
# Palettes

_ROOT_PALETTE = (
    PaletteItem(ADD_PROTOCOL, "Add Protocol", (("name", "identifier"),)),
    PaletteItem(ADD_CAPSULE, "Add Capsule", (("name", "identifier"),)),
    PaletteItem(RENAME, "Rename", (("newName", "identifier"),)),
    PaletteItem(DELETE, "Delete", ()),
)

_STRUCTURE_PALETTE = (
    PaletteItem(
        ADD_PORT,
        "Add Port",
        (("name", "identifier"), ("protocol", "elementRef"), ("conjugated", "text")),
    ),
    PaletteItem(
        ADD_PART, "Add Part", (("name", "identifier"), ("capsule", "elementRef"))
    ),
    PaletteItem(
        ADD_CONNECTOR, "Add Connector", (("endA", "text"), ("endB", "text"))
    ),
    PaletteItem(RENAME, "Rename", (("newName", "identifier"),)),
    PaletteItem(DELETE, "Delete", ()),
)

_BEHAVIOR_PALETTE = (
    PaletteItem(ADD_STATE, "Add State", (("name", "identifier"),)),
    PaletteItem(ADD_COMPOSITE_STATE, "Add Composite State", (("name", "identifier"),)),
    PaletteItem(
        ADD_TRANSITION,
        "Add Transition",
        (("source", "elementRef"), ("target", "elementRef")),
    ),
    PaletteItem(SET_INITIAL, "Set Initial", (("target", "elementRef"),)),
    PaletteItem(
        SET_TRANSITION_TRIGGER,
        "Set Trigger",
        (("port", "elementRef"), ("message", "elementRef")),
    ),
    PaletteItem(SET_TRANSITION_GUARD, "Set Guard", (("guard", "text"),)),
    PaletteItem(SET_TRANSITION_ACTION, "Set Action", (("action", "text"),)),
    PaletteItem(RENAME, "Rename", (("newName", "identifier"),)),
    PaletteItem(DELETE, "Delete", ()),
)

_PALETTES = {
    CATEGORY_ROOT: _ROOT_PALETTE,
    CATEGORY_STRUCTURE: _STRUCTURE_PALETTE,
    CATEGORY_BEHAVIOR: _BEHAVIOR_PALETTE,
    CATEGORY_ANALYSIS: (),  # analysis views are read-only
}


def palette_for(category: str) -> tuple[PaletteItem, ...]:
    if category not in _PALETTES:
        raise MalformedInput(f"unknown view category: {category!r}")
    return _PALETTES[category]
