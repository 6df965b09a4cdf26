"""Semantic validation of RT-lite models.

All checks are name-resolution and well-formedness rules; syntax problems
never reach this module.  Diagnostics point at the span of the offending
declaration and are ordered by span start.

Codes:
  E101 duplicate name            E104 multiple initial declarations
  E102 unresolved reference      E105 transition endpoints not sibling states
  E103 connector mismatch        E106 recursive part instantiation
"""

from __future__ import annotations

from .model import (
    EMPTY_SPAN,
    KIND_CAPSULE,
    KIND_CONNECTOR,
    KIND_INITIAL,
    KIND_MSG,
    KIND_PART,
    KIND_PORT,
    KIND_PROTOCOL,
    KIND_STATE,
    KIND_TRANS,
    SEVERITY_ERROR,
    SM_SEGMENT,
    CapsuleDecl,
    Diagnostic,
    ElementId,
    Model,
    Region,
    SourceSpan,
    element_id_of,
    find_capsule,
    find_part,
    find_port,
    find_protocol,
    find_state,
    sort_diagnostics,
)


def _span(element) -> SourceSpan:
    return element.span if element.span is not None else EMPTY_SPAN


def _error(code: str, element, message: str) -> Diagnostic:
    return Diagnostic(code, SEVERITY_ERROR, _span(element), message)


# ---------------------------------------------------------------------------
# validate

def validate(model: Model) -> list[Diagnostic]:
    """All semantic diagnostics for the model, ordered by span start."""
    diags: list[Diagnostic] = []
    _check_top_level_names(model, diags)
    for proto in model.protocols:
        _check_duplicates(proto.messages, "message", diags)
    for capsule in model.capsules:
        _check_capsule(model, capsule, diags)
    return sort_diagnostics(diags)


def _check_top_level_names(model: Model, diags: list[Diagnostic]) -> None:
    seen: set[str] = set()
    for decl in list(model.protocols) + list(model.capsules):
        if decl.name in seen:
            diags.append(_error("E101", decl, f"duplicate name '{decl.name}'"))
        seen.add(decl.name)


def _check_duplicates(decls, what: str, diags: list[Diagnostic]) -> None:
    seen: set[str] = set()
    for decl in decls:
        if decl.name in seen:
            diags.append(_error("E101", decl, f"duplicate {what} name '{decl.name}'"))
        seen.add(decl.name)


def _check_capsule(model: Model, capsule: CapsuleDecl, diags: list[Diagnostic]) -> None:
    # Ports and parts share one namespace: a connector end "x" or "x.y" must
    # identify its referent unambiguously.
    _check_duplicates(list(capsule.ports) + list(capsule.parts), "port or part", diags)

    for port in capsule.ports:
        if find_protocol(model, port.protocol_name) is None:
            diags.append(
                _error("E102", port, f"unresolved protocol '{port.protocol_name}'")
            )
    for part in capsule.parts:
        if find_capsule(model, part.capsule_name) is None:
            diags.append(
                _error("E102", part, f"unresolved capsule '{part.capsule_name}'")
            )
        elif _instantiates(model, part.capsule_name, capsule.name):
            diags.append(
                _error(
                    "E106",
                    part,
                    f"part '{part.name}' recursively instantiates capsule '{capsule.name}'",
                )
            )
    for conn in capsule.connectors:
        _check_connector(model, capsule, conn, diags)
    for extra in capsule.extra_machines:
        diags.append(
            _error("E101", extra, f"capsule '{capsule.name}' already has a state machine")
        )
    if capsule.machine is not None:
        _check_region(model, capsule, capsule.machine.region, diags)


def _instantiates(model: Model, capsule_name: str, owner_name: str) -> bool:
    """True when `capsule_name` is `owner_name` or transitively contains a
    part of that capsule; cycles in the part graph terminate the search."""
    seen: set[str] = set()
    stack = [capsule_name]
    while stack:
        name = stack.pop()
        if name == owner_name:
            return True
        if name in seen:
            continue
        seen.add(name)
        capsule = find_capsule(model, name)
        if capsule is not None:
            stack.extend(part.capsule_name for part in capsule.parts)
    return False


def _check_connector(model, capsule, conn, diags: list[Diagnostic]) -> None:
    ends = []
    for ref in (conn.end_a, conn.end_b):
        port = _resolve_end(model, capsule, ref, conn, diags)
        if port is not None:
            ends.append(port)
    if len(ends) < 2:
        return
    port_a, port_b = ends
    if find_protocol(model, port_a.protocol_name) is None or find_protocol(
        model, port_b.protocol_name
    ) is None:
        return  # the dangling protocol is already reported on the port
    if port_a.protocol_name != port_b.protocol_name:
        diags.append(
            _error(
                "E103",
                conn,
                f"connector ends use different protocols "
                f"('{port_a.protocol_name}' vs '{port_b.protocol_name}')",
            )
        )
    elif port_a.conjugated == port_b.conjugated:
        diags.append(
            _error("E103", conn, "connector ends must have opposite conjugation")
        )


def _resolve_end(model, capsule, ref, conn, diags: list[Diagnostic]):
    if ref.part is None:
        port = find_port(capsule, ref.port)
        if port is None:
            diags.append(_error("E102", conn, f"unresolved port '{ref.port}'"))
        return port
    part = find_part(capsule, ref.part)
    if part is None:
        diags.append(_error("E102", conn, f"unresolved part '{ref.part}'"))
        return None
    target = find_capsule(model, part.capsule_name)
    if target is None:
        return None  # already reported on the part declaration
    port = find_port(target, ref.port)
    if port is None:
        diags.append(
            _error(
                "E102",
                conn,
                f"capsule '{target.name}' has no port '{ref.port}'",
            )
        )
    return port


def _check_region(model, capsule, region: Region, diags: list[Diagnostic]) -> None:
    _check_duplicates(region.states, "state", diags)
    for extra in region.extra_initials:
        diags.append(_error("E104", extra, "multiple initial declarations in region"))
    if region.initial is not None and find_state(region, region.initial.target_name) is None:
        diags.append(
            _error(
                "E102",
                region.initial,
                f"unresolved initial state '{region.initial.target_name}'",
            )
        )
    for trans in region.transitions:
        for name in (trans.source_name, trans.target_name):
            if find_state(region, name) is None:
                diags.append(
                    _error(
                        "E105",
                        trans,
                        f"transition endpoint '{name}' is not a sibling state",
                    )
                )
        if trans.trigger is not None:
            _check_trigger(model, capsule, trans, diags)
    for state in region.states:
        if state.region is not None:
            _check_region(model, capsule, state.region, diags)


def _check_trigger(model, capsule, trans, diags: list[Diagnostic]) -> None:
    trig = trans.trigger
    port = find_port(capsule, trig.port_name)
    if port is None:
        diags.append(
            _error("E102", trans, f"unresolved trigger port '{trig.port_name}'")
        )
        return
    proto = find_protocol(model, port.protocol_name)
    if proto is None:
        return  # the dangling protocol is already reported on the port
    if all(msg.name != trig.message_name for msg in proto.messages):
        diags.append(
            _error(
                "E102",
                trans,
                f"protocol '{proto.name}' has no message '{trig.message_name}'",
            )
        )


# ---------------------------------------------------------------------------
# Reference graph (feeds delete safety)

def references(model: Model) -> list[tuple[ElementId, ElementId, str]]:
    """Every (referrer id, target id, description) pair in the model.

    Only resolvable references appear; dangling names are diagnostics, not
    references.  Used to refuse deletion of elements that are still in use.
    """
    refs: list[tuple[ElementId, ElementId, str]] = []
    for capsule in model.capsules:
        cap_path = [model.name, capsule.name]
        for port in capsule.ports:
            if find_protocol(model, port.protocol_name) is not None:
                refs.append(
                    (
                        element_id_of(KIND_PORT, cap_path + [port.name]),
                        element_id_of(KIND_PROTOCOL, [model.name, port.protocol_name]),
                        f"port '{port.name}' of capsule '{capsule.name}'",
                    )
                )
        for part in capsule.parts:
            if find_capsule(model, part.capsule_name) is not None:
                refs.append(
                    (
                        element_id_of(KIND_PART, cap_path + [part.name]),
                        element_id_of(KIND_CAPSULE, [model.name, part.capsule_name]),
                        f"part '{part.name}' of capsule '{capsule.name}'",
                    )
                )
        for index, conn in enumerate(capsule.connectors):
            conn_id = element_id_of(KIND_CONNECTOR, cap_path + [f"c{index}"])
            desc = f"connector in capsule '{capsule.name}'"
            for ref in (conn.end_a, conn.end_b):
                if ref.part is None:
                    if find_port(capsule, ref.port) is not None:
                        refs.append(
                            (conn_id, element_id_of(KIND_PORT, cap_path + [ref.port]), desc)
                        )
                    continue
                part = find_part(capsule, ref.part)
                if part is None:
                    continue
                refs.append(
                    (conn_id, element_id_of(KIND_PART, cap_path + [ref.part]), desc)
                )
                target = find_capsule(model, part.capsule_name)
                if target is not None and find_port(target, ref.port) is not None:
                    refs.append(
                        (
                            conn_id,
                            element_id_of(
                                KIND_PORT, [model.name, target.name, ref.port]
                            ),
                            desc,
                        )
                    )
        if capsule.machine is not None:
            _region_references(
                model, capsule, capsule.machine.region, cap_path + [SM_SEGMENT], refs
            )
    return refs


def _region_references(model, capsule, region: Region, path: list[str], refs) -> None:
    cap_path = [model.name, capsule.name]
    if region.initial is not None and find_state(region, region.initial.target_name):
        refs.append(
            (
                element_id_of(KIND_INITIAL, path),
                element_id_of(KIND_STATE, path + [region.initial.target_name]),
                "the initial declaration",
            )
        )
    counts: dict[tuple[str, str], int] = {}
    for trans in region.transitions:
        key = (trans.source_name, trans.target_name)
        ordinal = counts.get(key, 0)
        counts[key] = ordinal + 1
        trans_id = element_id_of(
            KIND_TRANS, path + [trans.source_name, trans.target_name], ordinal
        )
        desc = f"transition '{trans.source_name} -> {trans.target_name}'"
        for name in (trans.source_name, trans.target_name):
            if find_state(region, name) is not None:
                refs.append((trans_id, element_id_of(KIND_STATE, path + [name]), desc))
        if trans.trigger is not None:
            port = find_port(capsule, trans.trigger.port_name)
            if port is not None:
                refs.append(
                    (trans_id, element_id_of(KIND_PORT, cap_path + [port.name]), desc)
                )
                proto = find_protocol(model, port.protocol_name)
                if proto is not None and any(
                    msg.name == trans.trigger.message_name for msg in proto.messages
                ):
                    refs.append(
                        (
                            trans_id,
                            element_id_of(
                                KIND_MSG,
                                [model.name, proto.name, trans.trigger.message_name],
                            ),
                            desc,
                        )
                    )
    for state in region.states:
        if state.region is not None:
            _region_references(model, capsule, state.region, path + [state.name], refs)
