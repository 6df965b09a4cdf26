"""Canonical text form of RT-lite models.

Formatting rules: two-space indentation per nesting level (top-level
declarations inside the model sit at depth 0), one declaration per line, a
single blank line between top-level declarations, no trailing spaces, and a
trailing newline.  Serialization is total for any structurally well-formed
model, including semantically invalid ones.
"""

from __future__ import annotations

from .errors import TargetMissing
from .model import (
    CapsuleDecl,
    ConnectorDecl,
    Element,
    ElementId,
    InitialDecl,
    MessageDecl,
    Model,
    PartDecl,
    PortDecl,
    ProtocolDecl,
    Region,
    StateDecl,
    StateMachine,
    TransitionDecl,
    element_index,
)
from .parser import parse

INDENT = "  "


def serialize(model: Model) -> str:
    blocks = [_protocol_text(p, 0) for p in model.protocols]
    blocks += [_capsule_text(c, 0) for c in model.capsules]
    return f"model {model.name} {{\n" + "\n".join(blocks) + "}\n"


def serialize_subtree(model: Model, element_id: ElementId) -> str:
    """Canonical text of exactly one element's declaration, indented for its
    nesting depth and terminated by a newline."""
    entry = element_index(model).get(element_id)
    if entry is None:
        raise TargetMissing(f"no element with id {element_id!r}")
    if isinstance(entry.element, Model):
        return serialize(entry.element)
    return _element_text(entry.element, entry.depth)


def format_text(text: str):
    """Canonical form of a document: ``(formatted, [])`` on success or
    ``(None, diagnostics)`` when the text does not parse."""
    result = parse(text)
    if result.model is None:
        return None, result.diagnostics
    return serialize(result.model), []


# ---------------------------------------------------------------------------

def _element_text(element: Element, depth: int) -> str:
    if isinstance(element, ProtocolDecl):
        return _protocol_text(element, depth)
    if isinstance(element, MessageDecl):
        return f"{INDENT * depth}{element.direction} msg {element.name};\n"
    if isinstance(element, CapsuleDecl):
        return _capsule_text(element, depth)
    if isinstance(element, PortDecl):
        tilde = "~" if element.conjugated else ""
        return f"{INDENT * depth}port {element.name} : {tilde}{element.protocol_name};\n"
    if isinstance(element, PartDecl):
        return f"{INDENT * depth}part {element.name} : {element.capsule_name};\n"
    if isinstance(element, ConnectorDecl):
        return f"{INDENT * depth}connect {element.end_a.text()} to {element.end_b.text()};\n"
    if isinstance(element, StateMachine):
        return (
            f"{INDENT * depth}statemachine {{\n"
            + _region_text(element.region, depth + 1)
            + f"{INDENT * depth}}}\n"
        )
    if isinstance(element, StateDecl):
        return _state_text(element, depth)
    if isinstance(element, InitialDecl):
        return f"{INDENT * depth}initial -> {element.target_name};\n"
    if isinstance(element, TransitionDecl):
        return f"{INDENT * depth}{_transition_text(element)}\n"
    raise TargetMissing(f"cannot serialize {type(element).__name__}")


def _protocol_text(proto: ProtocolDecl, depth: int) -> str:
    pad = INDENT * depth
    body = "".join(_element_text(m, depth + 1) for m in proto.messages)
    return f"{pad}protocol {proto.name} {{\n{body}{pad}}}\n"


def _capsule_text(capsule: CapsuleDecl, depth: int) -> str:
    pad = INDENT * depth
    body = "".join(_element_text(p, depth + 1) for p in capsule.ports)
    body += "".join(_element_text(p, depth + 1) for p in capsule.parts)
    body += "".join(_element_text(c, depth + 1) for c in capsule.connectors)
    if capsule.machine is not None:
        body += _element_text(capsule.machine, depth + 1)
    return f"{pad}capsule {capsule.name} {{\n{body}{pad}}}\n"


def _region_text(region: Region, depth: int) -> str:
    body = ""
    if region.initial is not None:
        body += _element_text(region.initial, depth)
    for state in region.states:
        body += _state_text(state, depth)
    for trans in region.transitions:
        body += _element_text(trans, depth)
    return body


def _state_text(state: StateDecl, depth: int) -> str:
    pad = INDENT * depth
    if state.region is None:
        return f"{pad}state {state.name};\n"
    return (
        f"{pad}state {state.name} {{\n"
        + _region_text(state.region, depth + 1)
        + f"{pad}}}\n"
    )


def _transition_text(trans: TransitionDecl) -> str:
    text = f"{trans.source_name} -> {trans.target_name}"
    if trans.trigger is not None:
        text += f" on {trans.trigger.port_name}.{trans.trigger.message_name}"
    if trans.guard is not None:
        text += f" [{trans.guard}]"
    if trans.action is not None:
        text += f" / {trans.action}"
    return text + ";"
