"""Shared document state behind both editing endpoints.

The hub owns the text of every open document, the last successfully parsed
model with its span table, and the set of live graph subscriptions.  Both
the textual endpoint and the graph endpoint talk only to the hub, which is
what keeps the two kinds of client consistent:

  * a textual change reparses the document and refreshes every graph
    subscription (or marks a vanished view stale),
  * a graph operation mutates the model, splices the corresponding text
    edit into the document, and pushes that edit to textual sessions.

After a graph operation the hub reparses the spliced text and requires the
result to equal the mutated model.  A mismatch means the serializer and the
parser disagree and the hub refuses to continue rather than let the two
representations drift apart.

Session callbacks are invoked while the hub lock is held; they must only
enqueue work (hand the payload to a transport thread) and never call back
into the hub.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable

from .errors import (
    AlreadyOpen,
    DocumentStale,
    MutationRejected,
    PaletteViolation,
    StaleRevision,
    StaleVersion,
    UnknownDocument,
    UnknownView,
)
from .layout import layout
from .model import Diagnostic, ElementId, Model, sort_diagnostics
from .mutations import Mutation, apply_mutation
from .parser import RefSite, SpanTable, parse
from .splice import TextEdit, edit_for_mutation
from .validation import validate
from .views import (
    GGraph,
    PaletteItem,
    ViewDescriptor,
    list_views,
    palette_for,
    parse_view_id,
    render,
)

ModelUpdatedFn = Callable[[str, str, int, GGraph], None]
ViewStaleFn = Callable[[str, str, int], None]
ApplyEditFn = Callable[[str, str, list[TextEdit], int], None]

_session_ids = itertools.count(1)


@dataclass
class Session:
    """One connected client.  Graph clients receive model updates and stale
    notices for their subscribed views; textual clients receive the text
    edits produced by graph operations."""

    on_model_updated: ModelUpdatedFn | None = None
    on_view_stale: ViewStaleFn | None = None
    on_apply_edit: ApplyEditFn | None = None
    session_id: int = field(default_factory=lambda: next(_session_ids))

    def __hash__(self) -> int:
        return self.session_id


@dataclass
class DocumentState:
    uri: str
    text: str
    version: int  # client-supplied text document version
    revision: int  # server-side model revision, bumped on every change
    model: Model | None  # last successfully parsed model
    spans: SpanTable
    references: list[RefSite]
    diagnostics: list[Diagnostic]  # for the current text
    stale: bool  # current text did not parse


@dataclass(frozen=True)
class SyncOutcome:
    """Result of a graph operation."""

    accepted: bool
    revision: int
    affected_id: ElementId | None = None
    diagnostics: tuple[Diagnostic, ...] = ()
    reject_code: str | None = None
    reject_message: str | None = None


def analyze(text: str) -> tuple[Model | None, SpanTable, list[RefSite], list[Diagnostic]]:
    """Parse and validate in one step; diagnostics are the merged, sorted
    parse and validation findings."""
    result = parse(text)
    diagnostics = list(result.diagnostics)
    if result.model is not None:
        diagnostics.extend(validate(result.model))
    return result.model, result.spans, result.references, sort_diagnostics(diagnostics)


class ModelHub:
    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._docs: dict[str, DocumentState] = {}
        # per uri, in subscription order: (session, view id)
        self._subscriptions: dict[str, list[tuple[Session, str]]] = {}
        self._sessions: list[Session] = []

    # -- sessions -----------------------------------------------------------

    def create_session(
        self,
        *,
        on_model_updated: ModelUpdatedFn | None = None,
        on_view_stale: ViewStaleFn | None = None,
        on_apply_edit: ApplyEditFn | None = None,
    ) -> Session:
        session = Session(on_model_updated, on_view_stale, on_apply_edit)
        with self._lock:
            self._sessions.append(session)
        return session

    def drop_session(self, session: Session) -> None:
        with self._lock:
            self._sessions = [s for s in self._sessions if s is not session]
            for uri in self._subscriptions:
                self._subscriptions[uri] = [
                    (s, v) for s, v in self._subscriptions[uri] if s is not session
                ]

    # -- documents ----------------------------------------------------------

    def open(self, uri: str, text: str, version: int = 0) -> DocumentState:
        """Track a document.  Text with errors is accepted; the model stays
        absent until the text first parses."""
        with self._lock:
            if uri in self._docs:
                raise AlreadyOpen(f"document already open: {uri}")
            model, spans, references, diagnostics = analyze(text)
            doc = DocumentState(
                uri=uri,
                text=text,
                version=version,
                revision=1,
                model=model,
                spans=spans,
                references=references,
                diagnostics=diagnostics,
                stale=model is None,
            )
            self._docs[uri] = doc
            self._subscriptions.setdefault(uri, [])
            return doc

    def close(self, uri: str) -> None:
        with self._lock:
            self._require_doc(uri)
            del self._docs[uri]
            del self._subscriptions[uri]

    def snapshot(self, uri: str) -> DocumentState:
        with self._lock:
            return self._require_doc(uri)

    def open_uris(self) -> list[str]:
        with self._lock:
            return list(self._docs)

    def _require_doc(self, uri: str) -> DocumentState:
        doc = self._docs.get(uri)
        if doc is None:
            raise UnknownDocument(f"document not open: {uri}")
        return doc

    # -- textual changes ----------------------------------------------------

    def change_text(self, uri: str, new_text: str, version: int) -> DocumentState:
        """Replace the document text from the textual side.

        The version must be strictly newer than the last seen one.  When the
        new text parses, every graph subscription is refreshed (or receives
        one stale notice if its view no longer exists).  When it does not
        parse, the last good model is kept and subscribers are left alone
        until the text becomes valid again.
        """
        with self._lock:
            doc = self._require_doc(uri)
            if version <= doc.version:
                raise StaleVersion(
                    f"version {version} is not newer than {doc.version} for {uri}"
                )
            doc.version = version
            doc.text = new_text
            doc.revision += 1
            model, spans, references, diagnostics = analyze(new_text)
            doc.diagnostics = diagnostics
            if model is None:
                doc.stale = True
                return doc
            doc.model = model
            doc.spans = spans
            doc.references = references
            doc.stale = False
            self._refresh_subscriptions(doc)
            return doc

    # -- graph-side reads ---------------------------------------------------

    def views_of(self, uri: str) -> list[ViewDescriptor]:
        with self._lock:
            doc = self._require_doc(uri)
            if doc.stale or doc.model is None:
                raise DocumentStale(f"document text does not parse: {uri}")
            return list_views(doc.model)

    def palette(self, uri: str, view_id: str) -> tuple[PaletteItem, ...]:
        with self._lock:
            doc = self._require_doc(uri)
            if doc.stale or doc.model is None:
                raise DocumentStale(f"document text does not parse: {uri}")
            self._require_view(doc, view_id)
            return palette_for(parse_view_id(view_id).category)

    def render_view(self, uri: str, view_id: str) -> GGraph:
        with self._lock:
            doc = self._require_doc(uri)
            if doc.stale or doc.model is None:
                raise DocumentStale(f"document text does not parse: {uri}")
            self._require_view(doc, view_id)
            return self._positioned(doc, view_id)

    def subscribe(self, session: Session, uri: str, view_id: str) -> GGraph:
        """Start pushing updates of one view to the session and return its
        current graph."""
        with self._lock:
            graph = self.render_view(uri, view_id)
            subs = self._subscriptions[uri]
            if (session, view_id) not in [(s, v) for s, v in subs]:
                subs.append((session, view_id))
            return graph

    def unsubscribe(self, session: Session, uri: str, view_id: str | None = None) -> None:
        with self._lock:
            if uri not in self._subscriptions:
                return
            self._subscriptions[uri] = [
                (s, v)
                for s, v in self._subscriptions[uri]
                if not (s is session and (view_id is None or v == view_id))
            ]

    def switch_view(self, session: Session, uri: str, view_id: str) -> GGraph:
        """Replace the session's subscriptions on this document with the
        given view and return its graph."""
        with self._lock:
            graph = self.render_view(uri, view_id)
            self._subscriptions[uri] = [
                (s, v) for s, v in self._subscriptions[uri] if s is not session
            ]
            self._subscriptions[uri].append((session, view_id))
            return graph

    # -- graph operations ---------------------------------------------------

    def graph_operation(
        self,
        uri: str,
        view_id: str,
        mutation: Mutation,
        expected_revision: int | None = None,
    ) -> SyncOutcome:
        """Apply a palette operation issued from a graph view.

        The operation is checked against the document state (open, parsed,
        revision current), the view (known) and the view's palette before the
        mutation runs.  An accepted mutation updates the text through a
        single splice, bumps the revision and notifies every session.
        """
        with self._lock:
            doc = self._require_doc(uri)
            if doc.stale or doc.model is None:
                raise DocumentStale(f"document text does not parse: {uri}")
            if expected_revision is not None and expected_revision != doc.revision:
                raise StaleRevision(
                    f"expected revision {expected_revision}, document is at {doc.revision}"
                )
            self._require_view(doc, view_id)
            category = parse_view_id(view_id).category
            allowed = {item.operation_kind for item in palette_for(category)}
            if mutation.kind not in allowed:
                raise PaletteViolation(
                    f"operation {mutation.kind} is not in the {category} palette"
                )
            try:
                new_model, affected_id, diagnostics = apply_mutation(doc.model, mutation)
            except MutationRejected as rejection:
                return SyncOutcome(
                    accepted=False,
                    revision=doc.revision,
                    diagnostics=tuple(rejection.diagnostics),
                    reject_code=rejection.code,
                    reject_message=str(rejection),
                )
            old_text = doc.text
            new_text, edit = edit_for_mutation(
                old_text, doc.spans, doc.model, new_model, mutation, affected_id
            )
            reparsed = parse(new_text)
            if reparsed.model != new_model:
                raise RuntimeError(
                    "spliced text does not reparse to the mutated model; "
                    "refusing to desynchronize text and graph"
                )
            doc.text = new_text
            doc.revision += 1
            doc.model = reparsed.model
            doc.spans = reparsed.spans
            doc.references = reparsed.references
            doc.diagnostics = sort_diagnostics(
                list(reparsed.diagnostics) + list(diagnostics)
            )
            doc.stale = False
            for session in self._sessions:
                if session.on_apply_edit is not None:
                    session.on_apply_edit(uri, old_text, [edit], doc.revision)
            self._refresh_subscriptions(doc)
            return SyncOutcome(
                accepted=True,
                revision=doc.revision,
                affected_id=affected_id,
                diagnostics=tuple(diagnostics),
            )

    # -- internals ----------------------------------------------------------

    def _require_view(self, doc: DocumentState, view_id: str) -> None:
        known = {view.view_id for view in list_views(doc.model)}
        if view_id not in known:
            raise UnknownView(f"no view {view_id!r} in {doc.uri}")

    def _positioned(self, doc: DocumentState, view_id: str) -> GGraph:
        return layout(render(doc.model, view_id, revision=doc.revision))

    def _refresh_subscriptions(self, doc: DocumentState) -> None:
        known = {view.view_id for view in list_views(doc.model)}
        kept: list[tuple[Session, str]] = []
        for session, view_id in self._subscriptions[doc.uri]:
            if view_id in known:
                kept.append((session, view_id))
                if session.on_model_updated is not None:
                    session.on_model_updated(
                        doc.uri, view_id, doc.revision, self._positioned(doc, view_id)
                    )
            elif session.on_view_stale is not None:
                session.on_view_stale(doc.uri, view_id, doc.revision)
        self._subscriptions[doc.uri] = kept
