"""Minimal text edits derived from model mutations.

A graphical operation never rewrites the whole document: the mutated subtree
is re-serialized and spliced into the existing text at the span recorded for
it during the last parse.  Text outside the edited span is untouched, which
preserves comments and private formatting; canonical formatting applies only
inside the fragment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidContainer, StaleSpan
from .model import (
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
    ElementId,
    Model,
    SourceSpan,
    id_kind,
    lookup,
    region_of,
)
from .mutations import (
    ADD_CAPSULE,
    ADD_COMPOSITE_STATE,
    ADD_CONNECTOR,
    ADD_MESSAGE,
    ADD_PART,
    ADD_PORT,
    ADD_PROTOCOL,
    ADD_STATE,
    ADD_STATE_MACHINE,
    ADD_TRANSITION,
    DELETE,
    RENAME,
    SET_INITIAL,
    SET_TRANSITION_ACTION,
    SET_TRANSITION_GUARD,
    SET_TRANSITION_TRIGGER,
    Mutation,
)
from .parser import SpanTable
from .printer import serialize_subtree


@dataclass(frozen=True)
class TextEdit:
    """Replace the byte range ``span`` with ``new_text``."""

    span: SourceSpan
    new_text: str


@dataclass(frozen=True)
class SpliceTarget:
    op: str  # "replace" | "delete" | "insert"
    element_id: ElementId | None = None
    offset: int | None = None


def replace_element(element_id: ElementId) -> SpliceTarget:
    return SpliceTarget("replace", element_id)


def delete_element(element_id: ElementId) -> SpliceTarget:
    return SpliceTarget("delete", element_id)


def insert_at(offset: int) -> SpliceTarget:
    return SpliceTarget("insert", offset=offset)


# Which child kinds a container's declaration list can hold.
_CONTAINMENT = {
    KIND_MODEL: {KIND_PROTOCOL, KIND_CAPSULE},
    KIND_PROTOCOL: {KIND_MSG},
    KIND_CAPSULE: {KIND_PORT, KIND_PART, KIND_CONNECTOR, KIND_SM},
    KIND_SM: {KIND_STATE, KIND_INITIAL, KIND_TRANS},
    KIND_STATE: {KIND_STATE, KIND_INITIAL, KIND_TRANS},
}


def insertion_point(spans: SpanTable, container_id: ElementId, child_kind: str) -> int:
    """Byte offset at which a new child's text is inserted: immediately
    before the container's closing ``}``."""
    container_kind = id_kind(container_id)
    if child_kind not in _CONTAINMENT.get(container_kind, set()):
        raise InvalidContainer(
            f"a {container_kind} cannot contain a {child_kind} declaration"
        )
    span = spans.get(container_id)
    if span is None:
        raise StaleSpan(f"no span recorded for {container_id!r}")
    return span.end - 1


def splice(
    text: str, spans: SpanTable, target: SpliceTarget, fragment: str
) -> tuple[str, TextEdit]:
    """Apply one edit and return the new text plus the TextEdit performed.

    Replacements cover exactly the element's recorded span; deletions widen
    to whole lines (leading indentation and the trailing newline); insertions
    back up to the start of the line so the closing brace keeps its indent.
    """
    data = text.encode("utf-8")
    if target.op == "insert":
        offset = target.offset
        if offset is None or offset < 0 or offset > len(data):
            raise StaleSpan(f"insertion offset {offset!r} outside the document")
        offset = _line_start_if_blank(data, offset)
        edit = TextEdit(SourceSpan(offset, offset), fragment)
    else:
        span = spans.get(target.element_id)
        if span is None:
            raise StaleSpan(f"no span recorded for {target.element_id!r}")
        if span.end > len(data):
            raise StaleSpan(f"span {span} extends past the end of the document")
        if target.op == "delete":
            edit = TextEdit(_extend_to_lines(data, span), "")
        elif target.op == "replace":
            edit = TextEdit(span, fragment.strip())
        else:
            raise ValueError(f"unknown splice op {target.op!r}")
    new_data = data[: edit.span.start] + edit.new_text.encode("utf-8") + data[edit.span.end :]
    return new_data.decode("utf-8"), edit


def _line_start_if_blank(data: bytes, offset: int) -> int:
    i = offset
    while i > 0 and data[i - 1 : i] in (b" ", b"\t"):
        i -= 1
    if i == 0 or data[i - 1 : i] == b"\n":
        return i
    return offset


def _extend_to_lines(data: bytes, span: SourceSpan) -> SourceSpan:
    start = span.start
    i = start
    while i > 0 and data[i - 1 : i] in (b" ", b"\t"):
        i -= 1
    if i == 0 or data[i - 1 : i] == b"\n":
        start = i
    end = span.end
    j = end
    while j < len(data) and data[j : j + 1] in (b" ", b"\t"):
        j += 1
    if j >= len(data):
        end = j
    elif data[j : j + 1] == b"\n":
        end = j + 1
    return SourceSpan(start, end)


# ---------------------------------------------------------------------------
# Mutation -> edit planning

def edit_for_mutation(
    text: str,
    spans: SpanTable,
    old_model: Model,
    new_model: Model,
    mutation: Mutation,
    affected_id: ElementId,
) -> tuple[str, TextEdit]:
    """The single text edit realizing an already-applied mutation."""
    kind = mutation.kind

    if kind in (
        ADD_PROTOCOL,
        ADD_MESSAGE,
        ADD_CAPSULE,
        ADD_PORT,
        ADD_PART,
        ADD_CONNECTOR,
        ADD_STATE_MACHINE,
        ADD_STATE,
        ADD_COMPOSITE_STATE,
        ADD_TRANSITION,
    ):
        fragment = serialize_subtree(new_model, affected_id)
        if id_kind(mutation.target) == KIND_MODEL and (
            old_model.protocols or old_model.capsules
        ):
            # keep the blank line between top-level declarations
            fragment = "\n" + fragment
        offset = insertion_point(spans, mutation.target, id_kind(affected_id))
        return splice(text, spans, insert_at(offset), fragment)

    if kind == SET_INITIAL:
        container = lookup(old_model, mutation.target)
        region = region_of(container) if container is not None else None
        fragment = serialize_subtree(new_model, affected_id)
        if region is not None and region.initial is not None:
            return splice(text, spans, replace_element(affected_id), fragment)
        offset = insertion_point(spans, mutation.target, KIND_INITIAL)
        return splice(text, spans, insert_at(offset), fragment)

    if kind in (SET_TRANSITION_TRIGGER, SET_TRANSITION_GUARD, SET_TRANSITION_ACTION):
        fragment = serialize_subtree(new_model, affected_id)
        return splice(text, spans, replace_element(mutation.target), fragment)

    if kind == RENAME:
        fragment = serialize_subtree(new_model, affected_id)
        return splice(text, spans, replace_element(mutation.target), fragment)

    if kind == DELETE:
        return splice(text, spans, delete_element(mutation.target), "")

    raise ValueError(f"no edit strategy for mutation kind {kind!r}")
