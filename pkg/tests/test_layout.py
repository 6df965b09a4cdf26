"""Deterministic layout: frozen geometry plus structural invariants.

The expected rectangles and polylines below were computed by hand from the
layout rules (rows of 120x60 nodes, 20px margin, 60/40 gaps, boundary
clipping) and then frozen.
"""

from __future__ import annotations

import pytest

from hybridls.layout import DEFAULT_CONFIG, LayoutConfig, Point, Rect, assign_layers, layout
from hybridls.parser import parse
from hybridls.views import NODE_INITIAL, NODE_PORT, list_views, render, walk_nodes

from conftest import clean_corpus


def _graph(model, view_id):
    return layout(render(model, view_id))


def _by_id(graph):
    nodes = {}
    for node in walk_nodes(graph):
        nodes[node.id] = node
    return nodes


def test_config_defaults():
    assert DEFAULT_CONFIG == LayoutConfig(
        node_w=120,
        node_h=60,
        initial_size=16,
        gap_x=60,
        gap_y=40,
        margin=20,
        child_pad=10,
        title_band=24,
    )


def test_behavior_rows_frozen(ping_pong_model):
    graph = _graph(ping_pong_model, "behavior:M.Controller")
    nodes = _by_id(graph)
    assert nodes["initial:M.Controller.sm"].bounds == Rect(20, 42, 16, 16)
    assert nodes["state:M.Controller.sm.Idle"].bounds == Rect(20, 120, 120, 60)
    assert nodes["state:M.Controller.sm.Pinging"].bounds == Rect(20, 220, 120, 60)
    assert nodes["state:M.Controller.sm.Waiting"].bounds == Rect(20, 320, 120, 60)


def test_behavior_routes_frozen(ping_pong_model):
    graph = _graph(ping_pong_model, "behavior:M.Controller")
    routes = {e.id: e.routing_points for e in graph.edges()}
    assert routes["initial:M.Controller.sm@edge"] == [Point(32.16, 58), Point(64.4, 120)]
    assert routes["trans:M.Controller.sm.Idle.Pinging#0"] == [Point(80, 180), Point(80, 220)]
    assert routes["trans:M.Controller.sm.Pinging.Waiting#0"] == [Point(80, 280), Point(80, 320)]
    assert routes["trans:M.Controller.sm.Waiting.Idle#0"] == [Point(80, 320), Point(80, 180)]


def test_structure_ports_straddle_top_edge(ping_pong_model):
    graph = _graph(ping_pong_model, "structure:M.Controller")
    nodes = _by_id(graph)
    frame = nodes["capsule:M.Controller"]
    part = nodes["part:M.Controller.w"]
    assert frame.bounds == Rect(20, 20, 120, 60)
    assert part.bounds == Rect(20, 120, 120, 60)
    # port centers sit exactly on the parent's top edge
    assert nodes["port:M.Controller.p"].bounds == Rect(72, 12, 16, 16)
    assert nodes["port:M.Worker.q@w"].bounds == Rect(72, 112, 16, 16)
    (conn,) = graph.edges()
    assert conn.routing_points == [Point(80, 28), Point(80, 112)]


def test_root_single_row(ping_pong_model):
    graph = _graph(ping_pong_model, "root")
    assert [n.bounds for n in graph.nodes()] == [
        Rect(20, 20, 120, 60),
        Rect(200, 20, 120, 60),
        Rect(380, 20, 120, 60),
    ]


def test_layer_assignment(ping_pong_model):
    graph = render(ping_pong_model, "behavior:M.Controller")
    assert assign_layers(graph) == {
        "initial:M.Controller.sm": 0,
        "state:M.Controller.sm.Idle": 1,
        "state:M.Controller.sm.Pinging": 2,
        "state:M.Controller.sm.Waiting": 3,
    }


def test_disconnected_nodes_get_rows_below():
    text = (
        "model M {\n"
        "capsule C {\n"
        "  statemachine {\n"
        "    state A;\n"
        "    state B;\n"
        "    A -> B;\n"
        "    state Island {\n"
        "      state Deep;\n"
        "    }\n"
        "  }\n"
        "}\n"
        "}\n"
    )
    model = parse(text).model
    graph = render(model, "behavior:M.C")
    layers = assign_layers(graph)
    assert layers["state:M.C.sm.A"] == 0
    assert layers["state:M.C.sm.B"] == 1
    assert layers["state:M.C.sm.Island"] == 0


def test_self_loop_route():
    model = parse(
        "model Cyc {\ncapsule P {\n  statemachine {\n    initial -> Run;\n"
        "    state Run;\n    Run -> Run;\n  }\n}\n}\n"
    ).model
    graph = _graph(model, "behavior:Cyc.P")
    loop = next(e for e in graph.edges() if e.id.startswith("trans:"))
    assert loop.routing_points == [
        Point(140, 140),
        Point(170, 140),
        Point(170, 160),
        Point(140, 160),
    ]


def test_stacked_self_loops_spread_right():
    model = parse(
        "model Cyc {\ncapsule P {\n  statemachine {\n    initial -> Run;\n"
        "    state Run;\n    Run -> Run;\n    Run -> Run;\n  }\n}\n}\n"
    ).model
    graph = _graph(model, "behavior:Cyc.P")
    extents = [e.routing_points[1].x for e in graph.edges() if e.id.startswith("trans:")]
    assert extents == [170, 178]


def test_parallel_edges_take_distinct_offsets():
    model = parse(
        (clean_corpus()[0].parent / "parallel.rt").read_text(encoding="utf-8")
    ).model
    graph = _graph(model, "behavior:Parallel.Box")
    xs = {e.id: e.routing_points[0].x for e in graph.edges() if e.id.startswith("trans:")}
    assert xs == {
        "trans:Parallel.Box.sm.A.B#0": 72,
        "trans:Parallel.Box.sm.A.B#1": 88,
        "trans:Parallel.Box.sm.B.A#0": 64,
    }


@pytest.mark.parametrize("path", clean_corpus(), ids=lambda p: p.stem)
def test_invariants_across_corpus(path):
    model = parse(path.read_text(encoding="utf-8")).model
    assert model is not None
    for view in list_views(model):
        graph = _graph(model, view.view_id)
        tops = graph.nodes()
        for i, a in enumerate(tops):
            for b in tops[i + 1 :]:
                assert not a.bounds.overlaps(b.bounds), (view.view_id, a.id, b.id)
        for node in walk_nodes(graph):
            assert node.bounds is not None, (view.view_id, node.id)
            for child in node.children:
                if child.kind == NODE_PORT:
                    # straddles: center exactly on the parent's top edge
                    assert child.bounds.center.y == node.bounds.y
                else:
                    assert node.bounds.contains(child.bounds, pad=10)


@pytest.mark.parametrize("path", clean_corpus(), ids=lambda p: p.stem)
def test_rerun_is_identical(path):
    model = parse(path.read_text(encoding="utf-8")).model
    for view in list_views(model):
        first = _graph(model, view.view_id)
        second = _graph(model, view.view_id)
        assert [n.bounds for n in walk_nodes(first)] == [n.bounds for n in walk_nodes(second)]
        assert [e.routing_points for e in first.edges()] == [
            e.routing_points for e in second.edges()
        ]


def test_input_graph_not_mutated(ping_pong_model):
    plain = render(ping_pong_model, "behavior:M.Controller")
    layout(plain)
    assert all(n.bounds is None for n in walk_nodes(plain))
    assert all(e.routing_points == [] for e in plain.edges())


def test_wide_port_rows_grow_the_box():
    model = parse(
        "model M {\ncapsule C {\n"
        + "".join(f"  port p{i} : P;\n" for i in range(8))
        + "}\n}\n"
    ).model
    graph = _graph(model, "structure:M.C")
    frame = graph.nodes()[0]
    # 8 ports need (16+4)*(8+1) = 180 > default 120
    assert frame.bounds.w == 180
    centers = [c.bounds.center.x for c in frame.children]
    assert centers == [frame.bounds.x + 180 * (k + 1) / 9 for k in range(8)]
