"""Randomized invariants: serialization round-trips, formatting is a fixed
point of itself, and model mutations commute with their text edits."""

from __future__ import annotations

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from hybridls.errors import HybridlsError
from hybridls.layout import layout
from hybridls.model import (
    KEYWORDS,
    CapsuleDecl,
    ConnectorDecl,
    InitialDecl,
    MessageDecl,
    Model,
    PartDecl,
    PortDecl,
    PortRef,
    ProtocolDecl,
    Region,
    StateDecl,
    StateMachine,
    TransitionDecl,
    Trigger,
    element_index,
)
from hybridls.mutations import (
    ADD_CAPSULE,
    ADD_PROTOCOL,
    ADD_STATE,
    ADD_TRANSITION,
    DELETE,
    RENAME,
    Mutation,
    apply_mutation,
)
from hybridls.parser import parse
from hybridls.printer import format_text, serialize
from hybridls.splice import edit_for_mutation
from hybridls.views import list_views, render

IDENT = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in KEYWORDS
)
GUARD = st.text(
    alphabet="abcxyz01 <>=!&|()+-.", min_size=1, max_size=12
).map(str.strip).filter(bool)
ACTION = st.text(
    alphabet="abcxyz01 _(),+-.", min_size=1, max_size=12
).map(str.strip).filter(bool)


@st.composite
def region_strategy(draw, depth: int = 2) -> Region:
    names = draw(st.lists(IDENT, max_size=4, unique=True))
    states = []
    for name in names:
        nested = depth > 0 and draw(st.booleans())
        states.append(
            StateDecl(name, draw(region_strategy(depth=depth - 1)) if nested else None)
        )
    initial = InitialDecl(draw(st.sampled_from(names))) if names and draw(st.booleans()) else None
    transitions = []
    if names:
        for _ in range(draw(st.integers(0, 3))):
            trigger = draw(st.one_of(st.none(), st.builds(Trigger, IDENT, IDENT)))
            transitions.append(
                TransitionDecl(
                    draw(st.sampled_from(names)),
                    draw(st.sampled_from(names)),
                    trigger,
                    draw(st.one_of(st.none(), GUARD)),
                    draw(st.one_of(st.none(), ACTION)),
                )
            )
    return Region(initial, states, transitions)


@st.composite
def port_ref(draw) -> PortRef:
    if draw(st.booleans()):
        return PortRef(draw(IDENT))
    return PortRef(draw(IDENT), draw(IDENT))


@st.composite
def model_strategy(draw) -> Model:
    protocols = [
        ProtocolDecl(
            name,
            [
                MessageDecl(m, draw(st.sampled_from(["in", "out"])))
                for m in draw(st.lists(IDENT, max_size=3, unique=True))
            ],
        )
        for name in draw(st.lists(IDENT, max_size=2, unique=True))
    ]
    capsules = []
    for name in draw(st.lists(IDENT, max_size=3, unique=True)):
        member_names = draw(st.lists(IDENT, max_size=4, unique=True))
        split = draw(st.integers(0, len(member_names)))
        ports = [
            PortDecl(n, draw(IDENT), draw(st.booleans())) for n in member_names[:split]
        ]
        parts = [PartDecl(n, draw(IDENT)) for n in member_names[split:]]
        connectors = [
            ConnectorDecl(draw(port_ref()), draw(port_ref()))
            for _ in range(draw(st.integers(0, 2)))
        ]
        machine = StateMachine(draw(region_strategy())) if draw(st.booleans()) else None
        capsules.append(CapsuleDecl(name, ports, parts, connectors, machine))
    return Model(draw(IDENT), protocols, capsules)


@given(model_strategy())
@settings(max_examples=80, deadline=None)
def test_serialize_parse_round_trip(model):
    result = parse(serialize(model))
    assert result.model == model
    assert not any(d.code.startswith("E0") for d in result.diagnostics)


@given(model_strategy())
@settings(max_examples=80, deadline=None)
def test_canonical_text_is_a_formatting_fixed_point(model):
    text = serialize(model)
    assert format_text(text)[0] == text


@given(st.data())
@settings(
    max_examples=80,
    deadline=None,
    suppress_health_check=[HealthCheck.filter_too_much],
)
def test_mutations_commute_with_their_edits(data):
    model = data.draw(model_strategy())
    text = serialize(model)
    result = parse(text)
    assume(result.model is not None)
    index = element_index(result.model)
    target = data.draw(st.sampled_from(sorted(index)))
    kind = data.draw(
        st.sampled_from([ADD_PROTOCOL, ADD_CAPSULE, ADD_STATE, ADD_TRANSITION, RENAME, DELETE])
    )
    payload: dict = {}
    if kind in (ADD_PROTOCOL, ADD_CAPSULE, ADD_STATE):
        payload = {"name": data.draw(IDENT)}
    elif kind == RENAME:
        payload = {"newName": data.draw(IDENT)}
    elif kind == ADD_TRANSITION:
        payload = {"source": data.draw(IDENT), "target": data.draw(IDENT)}
    mutation = Mutation(kind, target, payload)
    try:
        new_model, affected, _ = apply_mutation(result.model, mutation)
    except HybridlsError:
        assume(False)
    new_text, edit = edit_for_mutation(
        text, result.spans, result.model, new_model, mutation, affected
    )
    assert parse(new_text).model == new_model
    data_bytes = text.encode("utf-8")
    new_bytes = new_text.encode("utf-8")
    assert new_bytes[: edit.span.start] == data_bytes[: edit.span.start]
    tail = len(data_bytes) - edit.span.end
    if tail:
        assert new_bytes[len(new_bytes) - tail :] == data_bytes[edit.span.end :]


@given(model_strategy())
@settings(max_examples=40, deadline=None)
def test_behavior_layouts_have_no_overlapping_siblings(model):
    for view in list_views(model):
        if view.category != "behavior":
            continue
        graph = layout(render(model, view.view_id))
        tops = graph.nodes()
        for i, a in enumerate(tops):
            for b in tops[i + 1 :]:
                assert not a.bounds.overlaps(b.bounds)
