"""Abstract syntax model for RT-lite.

A Model is a tree: protocols with messages, capsules with ports, parts,
connectors and an optional state machine, and state machines with one region
of states (possibly composite) and transitions.  Every element has a stable
ElementId derived from its qualified name, so two parses of the same text
assign identical ids.  Model values are treated as immutable snapshots;
mutation lives in :mod:`hybridls.mutations` and always returns a new tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import MalformedInput

# ---------------------------------------------------------------------------
# Spans and diagnostics

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """Half-open byte range [start, end) into the document text."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


EMPTY_SPAN = SourceSpan(0, 0)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    span: SourceSpan
    message: str


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Stable order by span start, then span end."""
    return sorted(diags, key=lambda d: (d.span.start, d.span.end))


# ---------------------------------------------------------------------------
# Identifiers

KEYWORDS = frozenset(
    [
        "model",
        "protocol",
        "capsule",
        "port",
        "part",
        "connect",
        "to",
        "statemachine",
        "state",
        "initial",
        "in",
        "out",
        "msg",
        "on",
    ]
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(text: str) -> bool:
    """True for a lexically valid, non-keyword RT-lite identifier."""
    return bool(_IDENT_RE.match(text)) and text not in KEYWORDS


def require_identifier(text: str, what: str) -> str:
    if not isinstance(text, str) or not is_identifier(text):
        raise MalformedInput(f"{what} is not a valid identifier: {text!r}")
    return text


# ---------------------------------------------------------------------------
# Element ids

ElementId = str

KIND_MODEL = "model"
KIND_PROTOCOL = "protocol"
KIND_MSG = "msg"
KIND_CAPSULE = "capsule"
KIND_PORT = "port"
KIND_PART = "part"
KIND_CONNECTOR = "connector"
KIND_SM = "sm"
KIND_STATE = "state"
KIND_INITIAL = "initial"
KIND_TRANS = "trans"

ALL_KINDS = frozenset(
    [
        KIND_MODEL,
        KIND_PROTOCOL,
        KIND_MSG,
        KIND_CAPSULE,
        KIND_PORT,
        KIND_PART,
        KIND_CONNECTOR,
        KIND_SM,
        KIND_STATE,
        KIND_INITIAL,
        KIND_TRANS,
    ]
)

# The path segment used for a capsule's (single) state machine.
SM_SEGMENT = "sm"

_SEGMENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def element_id_of(kind: str, segments: list[str], ordinal: int | None = None) -> ElementId:
    """Format an ElementId: ``<kind>:<dot.joined.segments>[#ordinal]``.

    Segments must be non-empty identifiers; the ordinal is only used for
    transitions, which are unnamed and share a (source, target) namespace.
    """
    if kind not in ALL_KINDS:
        raise MalformedInput(f"unknown element kind: {kind!r}")
    if not segments:
        raise MalformedInput("element path must have at least one segment")
    for seg in segments:
        if not _SEGMENT_RE.match(seg):
            raise MalformedInput(f"invalid path segment: {seg!r}")
    if ordinal is not None and kind != KIND_TRANS:
        raise MalformedInput(f"ordinal only applies to transitions, not {kind}")
    if kind == KIND_TRANS and ordinal is None:
        raise MalformedInput("transition ids require an ordinal")
    suffix = f"#{ordinal}" if ordinal is not None else ""
    return f"{kind}:{'.'.join(segments)}{suffix}"


def parse_element_id(element_id: ElementId) -> tuple[str, list[str], int | None]:
    """Split an ElementId back into (kind, segments, ordinal)."""
    kind, sep, rest = element_id.partition(":")
    if not sep or kind not in ALL_KINDS or not rest:
        raise MalformedInput(f"malformed element id: {element_id!r}")
    ordinal: int | None = None
    if "#" in rest:
        rest, _, ord_text = rest.partition("#")
        if kind != KIND_TRANS or not ord_text.isdigit():
            raise MalformedInput(f"malformed element id: {element_id!r}")
        ordinal = int(ord_text)
    elif kind == KIND_TRANS:
        raise MalformedInput(f"malformed element id: {element_id!r}")
    segments = rest.split(".")
    for seg in segments:
        if not _SEGMENT_RE.match(seg):
            raise MalformedInput(f"malformed element id: {element_id!r}")
    return kind, segments, ordinal


def id_kind(element_id: ElementId) -> str:
    return parse_element_id(element_id)[0]


# ---------------------------------------------------------------------------
# AST nodes
#
# Spans never take part in equality: a mutated snapshot compares equal to its
# reparsed counterpart even though only the latter carries fresh spans.


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass
class MessageDecl:
    name: str
    direction: str  # "in" | "out"
    span: SourceSpan | None = _span_field()


@dataclass
class ProtocolDecl:
    name: str
    messages: list[MessageDecl] = field(default_factory=list)
    span: SourceSpan | None = _span_field()


@dataclass
class PortDecl:
    name: str
    protocol_name: str
    conjugated: bool = False
    span: SourceSpan | None = _span_field()


@dataclass
class PartDecl:
    name: str
    capsule_name: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class PortRef:
    """One connector end: a port of the capsule itself (part is None) or a
    port of one of its parts (``part.port`` in the source)."""

    port: str
    part: str | None = None

    def text(self) -> str:
        return self.port if self.part is None else f"{self.part}.{self.port}"


@dataclass
class ConnectorDecl:
    end_a: PortRef
    end_b: PortRef
    span: SourceSpan | None = _span_field()


@dataclass
class Trigger:
    port_name: str
    message_name: str


@dataclass
class TransitionDecl:
    source_name: str
    target_name: str
    trigger: Trigger | None = None
    guard: str | None = None  # never contains "]" or a newline
    action: str | None = None  # never contains ";" or a newline
    span: SourceSpan | None = _span_field()


@dataclass
class InitialDecl:
    target_name: str
    span: SourceSpan | None = _span_field()


@dataclass
class Region:
    initial: InitialDecl | None = None
    states: list[StateDecl] = field(default_factory=list)
    transitions: list[TransitionDecl] = field(default_factory=list)
    # Extra initial declarations found by the parser; they only feed the
    # duplicate-initial diagnostic and are dropped by the serializer.
    extra_initials: list[InitialDecl] = field(default_factory=list, compare=False, repr=False)


@dataclass
class StateDecl:
    name: str
    region: Region | None = None  # composite iff a region is present
    span: SourceSpan | None = _span_field()

    @property
    def composite(self) -> bool:
        return self.region is not None


@dataclass
class StateMachine:
    region: Region = field(default_factory=Region)
    span: SourceSpan | None = _span_field()


@dataclass
class CapsuleDecl:
    name: str
    ports: list[PortDecl] = field(default_factory=list)
    parts: list[PartDecl] = field(default_factory=list)
    connectors: list[ConnectorDecl] = field(default_factory=list)
    machine: StateMachine | None = None
    # Extra machine declarations found by the parser; they only feed the
    # duplicate diagnostic and are dropped by the serializer.
    extra_machines: list[StateMachine] = field(default_factory=list, compare=False, repr=False)
    span: SourceSpan | None = _span_field()


@dataclass
class Model:
    name: str
    protocols: list[ProtocolDecl] = field(default_factory=list)
    capsules: list[CapsuleDecl] = field(default_factory=list)
    span: SourceSpan | None = _span_field()


Element = (
    Model
    | ProtocolDecl
    | MessageDecl
    | CapsuleDecl
    | PortDecl
    | PartDecl
    | ConnectorDecl
    | StateMachine
    | StateDecl
    | InitialDecl
    | TransitionDecl
)


# ---------------------------------------------------------------------------
# Traversal

@dataclass(frozen=True)
class ElementEntry:
    element_id: ElementId
    element: Element
    parent_id: ElementId | None
    depth: int  # indentation depth: capsules and protocols sit at depth 0


def _transition_ordinals(region: Region) -> list[int]:
    counts: dict[tuple[str, str], int] = {}
    ordinals: list[int] = []
    for trans in region.transitions:
        key = (trans.source_name, trans.target_name)
        ordinals.append(counts.get(key, 0))
        counts[key] = counts.get(key, 0) + 1
    return ordinals


def _iter_region(
    region: Region, path: list[str], owner_id: ElementId, depth: int
) -> list[ElementEntry]:
    """Children of a region owner (state machine or composite state), in
    canonical order: initial marker, states, transitions."""
    entries: list[ElementEntry] = []
    if region.initial is not None:
        entries.append(
            ElementEntry(element_id_of(KIND_INITIAL, path), region.initial, owner_id, depth)
        )
    for state in region.states:
        state_path = path + [state.name]
        state_id = element_id_of(KIND_STATE, state_path)
        entries.append(ElementEntry(state_id, state, owner_id, depth))
        if state.region is not None:
            entries.extend(_iter_region(state.region, state_path, state_id, depth + 1))
    for trans, ordinal in zip(region.transitions, _transition_ordinals(region)):
        trans_id = element_id_of(
            KIND_TRANS, path + [trans.source_name, trans.target_name], ordinal
        )
        entries.append(ElementEntry(trans_id, trans, owner_id, depth))
    return entries


def iter_elements(model: Model) -> list[ElementEntry]:
    """Every element of the model with its id, parent id and nesting depth,
    in canonical declaration order."""
    model_id = element_id_of(KIND_MODEL, [model.name])
    entries = [ElementEntry(model_id, model, None, -1)]
    for proto in model.protocols:
        proto_id = element_id_of(KIND_PROTOCOL, [model.name, proto.name])
        entries.append(ElementEntry(proto_id, proto, model_id, 0))
        for msg in proto.messages:
            msg_id = element_id_of(KIND_MSG, [model.name, proto.name, msg.name])
            entries.append(ElementEntry(msg_id, msg, proto_id, 1))
    for capsule in model.capsules:
        cap_path = [model.name, capsule.name]
        cap_id = element_id_of(KIND_CAPSULE, cap_path)
        entries.append(ElementEntry(cap_id, capsule, model_id, 0))
        for port in capsule.ports:
            entries.append(
                ElementEntry(element_id_of(KIND_PORT, cap_path + [port.name]), port, cap_id, 1)
            )
        for part in capsule.parts:
            entries.append(
                ElementEntry(element_id_of(KIND_PART, cap_path + [part.name]), part, cap_id, 1)
            )
        for index, conn in enumerate(capsule.connectors):
            conn_id = element_id_of(KIND_CONNECTOR, cap_path + [f"c{index}"])
            entries.append(ElementEntry(conn_id, conn, cap_id, 1))
        if capsule.machine is not None:
            sm_path = cap_path + [SM_SEGMENT]
            sm_id = element_id_of(KIND_SM, sm_path)
            entries.append(ElementEntry(sm_id, capsule.machine, cap_id, 1))
            entries.extend(_iter_region(capsule.machine.region, sm_path, sm_id, 2))
    return entries


def element_index(model: Model) -> dict[ElementId, ElementEntry]:
    return {entry.element_id: entry for entry in iter_elements(model)}


def lookup(model: Model, element_id: ElementId) -> Element | None:
    """The element with the given id, or None if absent."""
    for entry in iter_elements(model):
        if entry.element_id == element_id:
            return entry.element
    return None


def children_of(model: Model, element_id: ElementId) -> list[ElementId]:
    """Ids of the direct children, in canonical declaration order.

    A state machine or composite state reports its region's initial marker,
    states and transitions; leaf elements report an empty list.
    """
    entries = iter_elements(model)
    known = {entry.element_id for entry in entries}
    if element_id not in known:
        return []
    return [entry.element_id for entry in entries if entry.parent_id == element_id]


# ---------------------------------------------------------------------------
# Region access helpers shared by validation, mutation and rendering

def region_of(element: Element) -> Region | None:
    """The region owned by a state machine or composite state, else None."""
    if isinstance(element, StateMachine):
        return element.region
    if isinstance(element, StateDecl):
        return element.region
    return None


def find_capsule(model: Model, name: str) -> CapsuleDecl | None:
    for capsule in model.capsules:
        if capsule.name == name:
            return capsule
    return None


def find_protocol(model: Model, name: str) -> ProtocolDecl | None:
    for proto in model.protocols:
        if proto.name == name:
            return proto
    return None


def find_port(capsule: CapsuleDecl, name: str) -> PortDecl | None:
    for port in capsule.ports:
        if port.name == name:
            return port
    return None


def find_part(capsule: CapsuleDecl, name: str) -> PartDecl | None:
    for part in capsule.parts:
        if part.name == name:
            return part
    return None


def find_state(region: Region, name: str) -> StateDecl | None:
    for state in region.states:
        if state.name == name:
            return state
    return None


def resolve_port_ref(model: Model, capsule: CapsuleDecl, ref: PortRef) -> PortDecl | None:
    """The port a connector end points at, following part typing; None when
    any step of the resolution fails."""
    if ref.part is None:
        return find_port(capsule, ref.port)
    part = find_part(capsule, ref.part)
    if part is None:
        return None
    target = find_capsule(model, part.capsule_name)
    if target is None:
        return None
    return find_port(target, ref.port)


def transition_label(trans: TransitionDecl) -> str:
    """Display label: ``trigger [guard] / action`` with absent pieces omitted."""
    pieces: list[str] = []
    if trans.trigger is not None:
        pieces.append(f"{trans.trigger.port_name}.{trans.trigger.message_name}")
    if trans.guard is not None:
        pieces.append(f"[{trans.guard}]")
    if trans.action is not None:
        pieces.append(f"/ {trans.action}")
    return " ".join(pieces)
