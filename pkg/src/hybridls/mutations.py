"""Palette-driven mutations of RT-lite models.

A Mutation names its kind, a target (or container) ElementId and a payload
of plain values, which keeps the type wire-friendly.  apply_mutation never
touches its input: it deep-copies the snapshot, edits the copy and returns
``(new model, affected id, diagnostics)`` where the diagnostics are a fresh
validation run over the new model.

Mutations that would corrupt the model's naming or leave dangling references
behind are rejected: adding or renaming to a sibling-colliding name (E101)
and deleting an element that something outside the deleted subtree still
references (E107).  Everything else is accepted even when it leaves semantic
diagnostics; the textual channel can produce the same states.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import InvalidContainer, MalformedInput, MutationRejected, TargetMissing
from .model import (
    EMPTY_SPAN,
    KIND_CAPSULE,
    KIND_CONNECTOR,
    KIND_INITIAL,
    KIND_MODEL,
    KIND_MSG,
    KIND_PART,
    KIND_PORT,
    KIND_PROTOCOL,
    KIND_SM,
    KIND_STATE,
    KIND_TRANS,
    SEVERITY_ERROR,
    SM_SEGMENT,
    CapsuleDecl,
    ConnectorDecl,
    Diagnostic,
    Element,
    ElementId,
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
    element_id_of,
    element_index,
    parse_element_id,
    region_of,
    require_identifier,
)
from .validation import references, validate

ADD_PROTOCOL = "AddProtocol"
ADD_MESSAGE = "AddMessage"
ADD_CAPSULE = "AddCapsule"
ADD_PORT = "AddPort"
ADD_PART = "AddPart"
ADD_CONNECTOR = "AddConnector"
ADD_STATE_MACHINE = "AddStateMachine"
ADD_STATE = "AddState"
ADD_COMPOSITE_STATE = "AddCompositeState"
SET_INITIAL = "SetInitial"
ADD_TRANSITION = "AddTransition"
SET_TRANSITION_TRIGGER = "SetTransitionTrigger"
SET_TRANSITION_GUARD = "SetTransitionGuard"
SET_TRANSITION_ACTION = "SetTransitionAction"
RENAME = "Rename"
DELETE = "Delete"

MUTATION_KINDS = (
    ADD_PROTOCOL,
    ADD_MESSAGE,
    ADD_CAPSULE,
    ADD_PORT,
    ADD_PART,
    ADD_CONNECTOR,
    ADD_STATE_MACHINE,
    ADD_STATE,
    ADD_COMPOSITE_STATE,
    SET_INITIAL,
    ADD_TRANSITION,
    SET_TRANSITION_TRIGGER,
    SET_TRANSITION_GUARD,
    SET_TRANSITION_ACTION,
    RENAME,
    DELETE,
)


@dataclass
class Mutation:
    kind: str
    target: ElementId  # the container for Add*, the element itself otherwise
    payload: dict = field(default_factory=dict)


def mutation_from_json(obj) -> Mutation:
    """Decode the wire form ``{kind, target, payload}`` with shape checks."""
    if not isinstance(obj, dict):
        raise MalformedInput("mutation must be an object")
    kind = obj.get("kind")
    target = obj.get("target")
    payload = obj.get("payload", {})
    if kind not in MUTATION_KINDS:
        raise MalformedInput(f"unknown mutation kind: {kind!r}")
    if not isinstance(target, str) or not target:
        raise MalformedInput("mutation target must be a non-empty ElementId")
    if not isinstance(payload, dict):
        raise MalformedInput("mutation payload must be an object")
    return Mutation(kind, target, payload)


def mutation_to_json(mutation: Mutation) -> dict:
    return {"kind": mutation.kind, "target": mutation.target, "payload": dict(mutation.payload)}


# ---------------------------------------------------------------------------
# Payload helpers

def _payload_name(mutation: Mutation, key: str = "name") -> str:
    value = mutation.payload.get(key)
    if not isinstance(value, str):
        raise MalformedInput(f"{mutation.kind} payload needs a '{key}' string")
    return require_identifier(value, key)


def _payload_text(mutation: Mutation, key: str) -> str:
    value = mutation.payload.get(key)
    if value is None:
        return ""
    if not isinstance(value, str):
        raise MalformedInput(f"{mutation.kind} payload field '{key}' must be a string")
    return value


def check_guard_text(text: str) -> str:
    text = text.strip()
    if "]" in text or "\n" in text or "\r" in text:
        raise MalformedInput("guard text must not contain ']' or newlines")
    return text


def check_action_text(text: str) -> str:
    text = text.strip()
    if ";" in text or "\n" in text or "\r" in text:
        raise MalformedInput("action text must not contain ';' or newlines")
    return text


def parse_port_ref(value) -> PortRef:
    """Accept 'p', 'w.q' or {'part': ..., 'port': ...}."""
    if isinstance(value, dict):
        part = value.get("part")
        port = value.get("port")
        if part is not None:
            part = require_identifier(part, "part")
        if not isinstance(port, str):
            raise MalformedInput("port ref object needs a 'port' string")
        return PortRef(require_identifier(port, "port"), part)
    if isinstance(value, str):
        if "." in value:
            part, _, port = value.partition(".")
            return PortRef(
                require_identifier(port, "port"), require_identifier(part, "part")
            )
        return PortRef(require_identifier(value, "port"))
    raise MalformedInput(f"not a port reference: {value!r}")


# ---------------------------------------------------------------------------
# apply_mutation

def apply_mutation(
    model: Model, mutation: Mutation
) -> tuple[Model, ElementId, list[Diagnostic]]:
    """Apply one mutation to a snapshot.

    Returns the new snapshot, the id of the affected element (the new element
    for Add*, the renamed id for Rename, the former parent for Delete) and
    the diagnostics of the new snapshot.  Raises MutationRejected for E101 /
    E107 refusals, TargetMissing or InvalidContainer for bad targets and
    MalformedInput for bad payloads; the input model is never modified.
    """
    if mutation.kind not in MUTATION_KINDS:
        raise MalformedInput(f"unknown mutation kind: {mutation.kind!r}")
    new_model = copy.deepcopy(model)
    handler = _HANDLERS[mutation.kind]
    affected = handler(new_model, mutation)
    return new_model, affected, validate(new_model)


def _resolve(model: Model, element_id: ElementId):
    index = element_index(model)
    entry = index.get(element_id)
    if entry is None:
        raise TargetMissing(f"no element with id {element_id!r}")
    return entry, index


def _reject_duplicate(owner: Element, name: str) -> None:
    span = owner.span if getattr(owner, "span", None) is not None else EMPTY_SPAN
    raise MutationRejected(
        "E101",
        [Diagnostic("E101", SEVERITY_ERROR, span, f"duplicate name '{name}'")],
    )


def _model_names(model: Model) -> set[str]:
    return {p.name for p in model.protocols} | {c.name for c in model.capsules}


def _capsule_child_names(capsule: CapsuleDecl) -> set[str]:
    return {p.name for p in capsule.ports} | {p.name for p in capsule.parts}


def _require_kind(entry, *kinds: str):
    kind = parse_element_id(entry.element_id)[0]
    if kind not in kinds:
        raise InvalidContainer(
            f"{entry.element_id!r} cannot be used here (expected {' or '.join(kinds)})"
        )
    return entry.element


def _require_region(entry) -> Region:
    element = _require_kind(entry, KIND_SM, KIND_STATE)
    region = region_of(element)
    if region is None:
        raise InvalidContainer(
            f"{entry.element_id!r} is a simple state and cannot contain children"
        )
    return region


# --- Add* ------------------------------------------------------------------

def _add_protocol(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    container = _require_kind(entry, KIND_MODEL)
    name = _payload_name(mutation)
    if name in _model_names(container):
        _reject_duplicate(container, name)
    container.protocols.append(ProtocolDecl(name))
    return element_id_of(KIND_PROTOCOL, [model.name, name])


def _add_message(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    proto = _require_kind(entry, KIND_PROTOCOL)
    name = _payload_name(mutation)
    direction = mutation.payload.get("direction")
    if direction not in ("in", "out"):
        raise MalformedInput("AddMessage direction must be 'in' or 'out'")
    if any(m.name == name for m in proto.messages):
        _reject_duplicate(proto, name)
    proto.messages.append(MessageDecl(name, direction))
    return element_id_of(KIND_MSG, [model.name, proto.name, name])


def _add_capsule(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    container = _require_kind(entry, KIND_MODEL)
    name = _payload_name(mutation)
    if name in _model_names(container):
        _reject_duplicate(container, name)
    container.capsules.append(CapsuleDecl(name))
    return element_id_of(KIND_CAPSULE, [model.name, name])


def _add_port(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    capsule = _require_kind(entry, KIND_CAPSULE)
    name = _payload_name(mutation)
    protocol = _payload_name(mutation, "protocol")
    conjugated = mutation.payload.get("conjugated", False)
    if not isinstance(conjugated, bool):
        raise MalformedInput("AddPort 'conjugated' must be a boolean")
    if name in _capsule_child_names(capsule):
        _reject_duplicate(capsule, name)
    capsule.ports.append(PortDecl(name, protocol, conjugated))
    return element_id_of(KIND_PORT, [model.name, capsule.name, name])


def _add_part(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    capsule = _require_kind(entry, KIND_CAPSULE)
    name = _payload_name(mutation)
    capsule_name = _payload_name(mutation, "capsule")
    if name in _capsule_child_names(capsule):
        _reject_duplicate(capsule, name)
    capsule.parts.append(PartDecl(name, capsule_name))
    return element_id_of(KIND_PART, [model.name, capsule.name, name])


def _add_connector(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    capsule = _require_kind(entry, KIND_CAPSULE)
    end_a = parse_port_ref(mutation.payload.get("endA"))
    end_b = parse_port_ref(mutation.payload.get("endB"))
    capsule.connectors.append(ConnectorDecl(end_a, end_b))
    ordinal = len(capsule.connectors) - 1
    return element_id_of(KIND_CONNECTOR, [model.name, capsule.name, f"c{ordinal}"])


def _add_state_machine(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    capsule = _require_kind(entry, KIND_CAPSULE)
    if capsule.machine is not None:
        span = capsule.span if capsule.span is not None else EMPTY_SPAN
        raise MutationRejected(
            "E101",
            [
                Diagnostic(
                    "E101",
                    SEVERITY_ERROR,
                    span,
                    f"capsule '{capsule.name}' already has a state machine",
                )
            ],
        )
    capsule.machine = StateMachine()
    return element_id_of(KIND_SM, [model.name, capsule.name, SM_SEGMENT])


def _add_state_common(model: Model, mutation: Mutation, composite: bool) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    region = _require_region(entry)
    name = _payload_name(mutation)
    if any(s.name == name for s in region.states):
        _reject_duplicate(entry.element, name)
    region.states.append(StateDecl(name, Region() if composite else None))
    _, segments, _ = parse_element_id(entry.element_id)
    return element_id_of(KIND_STATE, segments + [name])


def _add_state(model: Model, mutation: Mutation) -> ElementId:
    return _add_state_common(model, mutation, composite=False)


def _add_composite_state(model: Model, mutation: Mutation) -> ElementId:
    return _add_state_common(model, mutation, composite=True)


# --- Set* ------------------------------------------------------------------

def _set_initial(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    region = _require_region(entry)
    target_name = _payload_name(mutation, "target")
    region.initial = InitialDecl(target_name)
    region.extra_initials = []
    _, segments, _ = parse_element_id(entry.element_id)
    return element_id_of(KIND_INITIAL, segments)


def _add_transition(model: Model, mutation: Mutation) -> ElementId:
    entry, _ = _resolve(model, mutation.target)
    region = _require_region(entry)
    source = _payload_name(mutation, "source")
    target = _payload_name(mutation, "target")
    trans = TransitionDecl(source, target)
    port = mutation.payload.get("port")
    message = mutation.payload.get("message")
    if (port is None) != (message is None):
        raise MalformedInput("AddTransition trigger needs both 'port' and 'message'")
    if port is not None:
        trans.trigger = Trigger(
            require_identifier(port, "port"), require_identifier(message, "message")
        )
    guard = check_guard_text(_payload_text(mutation, "guard"))
    action = check_action_text(_payload_text(mutation, "action"))
    trans.guard = guard or None
    trans.action = action or None
    region.transitions.append(trans)
    ordinal = (
        sum(
            1
            for t in region.transitions
            if (t.source_name, t.target_name) == (source, target)
        )
        - 1
    )
    _, segments, _ = parse_element_id(entry.element_id)
    return element_id_of(KIND_TRANS, segments + [source, target], ordinal)


def _require_transition(model: Model, mutation: Mutation) -> TransitionDecl:
    entry, _ = _resolve(model, mutation.target)
    element = _require_kind(entry, KIND_TRANS)
    return element


def _set_transition_trigger(model: Model, mutation: Mutation) -> ElementId:
    trans = _require_transition(model, mutation)
    port = _payload_text(mutation, "port")
    message = _payload_text(mutation, "message")
    if not port and not message:
        trans.trigger = None
    else:
        trans.trigger = Trigger(
            require_identifier(port, "port"), require_identifier(message, "message")
        )
    return mutation.target


def _set_transition_guard(model: Model, mutation: Mutation) -> ElementId:
    trans = _require_transition(model, mutation)
    guard = check_guard_text(_payload_text(mutation, "guard"))
    trans.guard = guard or None
    return mutation.target


def _set_transition_action(model: Model, mutation: Mutation) -> ElementId:
    trans = _require_transition(model, mutation)
    action = check_action_text(_payload_text(mutation, "action"))
    trans.action = action or None
    return mutation.target


# --- Rename ----------------------------------------------------------------

_NAMED_KINDS = (KIND_MODEL, KIND_PROTOCOL, KIND_MSG, KIND_CAPSULE, KIND_PORT, KIND_PART, KIND_STATE)


def _rename(model: Model, mutation: Mutation) -> ElementId:
    entry, index = _resolve(model, mutation.target)
    kind, segments, _ = parse_element_id(entry.element_id)
    if kind not in _NAMED_KINDS:
        raise MalformedInput(f"elements of kind '{kind}' have no name to change")
    new_name = _payload_name(mutation, "newName")
    element = entry.element
    if new_name != element.name:
        _check_rename_collision(model, entry, index, new_name)
    element.name = new_name
    return element_id_of(kind, segments[:-1] + [new_name])


def _check_rename_collision(model: Model, entry, index, new_name: str) -> None:
    if entry.parent_id is None:
        return  # the model root has no siblings
    parent = index[entry.parent_id].element
    if isinstance(parent, Model):
        siblings = _model_names(parent)
    elif isinstance(parent, ProtocolDecl):
        siblings = {m.name for m in parent.messages}
    elif isinstance(parent, CapsuleDecl):
        siblings = _capsule_child_names(parent)
    else:
        region = region_of(parent)
        siblings = {s.name for s in region.states} if region else set()
    if new_name in siblings:
        _reject_duplicate(parent, new_name)


# --- Delete ----------------------------------------------------------------

def _delete(model: Model, mutation: Mutation) -> ElementId:
    entry, index = _resolve(model, mutation.target)
    if entry.parent_id is None:
        raise MalformedInput("the model root cannot be deleted")

    subtree = _subtree_ids(index, mutation.target)
    for referrer, target, description in references(model):
        if referrer not in subtree and target in subtree:
            span = getattr(entry.element, "span", None) or EMPTY_SPAN
            raise MutationRejected(
                "E107",
                [
                    Diagnostic(
                        "E107",
                        SEVERITY_ERROR,
                        span,
                        f"cannot delete {mutation.target}: still referenced by {description}",
                    )
                ],
            )

    parent = index[entry.parent_id].element
    kind = parse_element_id(mutation.target)[0]
    _remove_child(parent, kind, entry.element)
    return entry.parent_id


def _subtree_ids(index, root: ElementId) -> set[ElementId]:
    children: dict[ElementId, list[ElementId]] = {}
    for entry in index.values():
        if entry.parent_id is not None:
            children.setdefault(entry.parent_id, []).append(entry.element_id)
    subtree = {root}
    queue = [root]
    while queue:
        for child in children.get(queue.pop(), []):
            subtree.add(child)
            queue.append(child)
    return subtree


def _remove_by_identity(items: list, element) -> None:
    for i, item in enumerate(items):
        if item is element:
            del items[i]
            return
    raise TargetMissing("element vanished from its parent list")


def _remove_child(parent: Element, kind: str, element: Element) -> None:
    if kind == KIND_PROTOCOL:
        _remove_by_identity(parent.protocols, element)
    elif kind == KIND_CAPSULE:
        _remove_by_identity(parent.capsules, element)
    elif kind == KIND_MSG:
        _remove_by_identity(parent.messages, element)
    elif kind == KIND_PORT:
        _remove_by_identity(parent.ports, element)
    elif kind == KIND_PART:
        _remove_by_identity(parent.parts, element)
    elif kind == KIND_CONNECTOR:
        _remove_by_identity(parent.connectors, element)
    elif kind == KIND_SM:
        parent.machine = None
    elif kind == KIND_STATE:
        _remove_by_identity(region_of(parent).states, element)
    elif kind == KIND_INITIAL:
        region_of(parent).initial = None
    elif kind == KIND_TRANS:
        _remove_by_identity(region_of(parent).transitions, element)
    else:
        raise MalformedInput(f"elements of kind '{kind}' cannot be deleted")


_HANDLERS = {
    ADD_PROTOCOL: _add_protocol,
    ADD_MESSAGE: _add_message,
    ADD_CAPSULE: _add_capsule,
    ADD_PORT: _add_port,
    ADD_PART: _add_part,
    ADD_CONNECTOR: _add_connector,
    ADD_STATE_MACHINE: _add_state_machine,
    ADD_STATE: _add_state,
    ADD_COMPOSITE_STATE: _add_composite_state,
    SET_INITIAL: _set_initial,
    ADD_TRANSITION: _add_transition,
    SET_TRANSITION_TRIGGER: _set_transition_trigger,
    SET_TRANSITION_GUARD: _set_transition_guard,
    SET_TRANSITION_ACTION: _set_transition_action,
    RENAME: _rename,
    DELETE: _delete,
}
