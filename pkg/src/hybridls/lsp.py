"""Textual endpoint: a language-server-protocol subset over framed JSON.

The server advertises full-document sync, document symbols, definition and
formatting.  Text changes flow into the hub; text edits produced by graph
operations flow back out as ``workspace/applyEdit`` requests, which keeps
any protocol-conforming editor usable as the textual client unchanged.

All byte spans leave the server as line/character positions with characters
counted in UTF-16 code units, converted through one mapping per document
text so that positions and spans stay mutually recoverable.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, BinaryIO, Callable

from .errors import AlreadyOpen, HybridlsError, StaleVersion, UnknownDocument
from .hub import DocumentState, ModelHub, Session
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
    ConnectorDecl,
    Diagnostic,
    InitialDecl,
    SourceSpan,
    StateDecl,
    StateMachine,
    TransitionDecl,
    children_of,
    element_index,
    id_kind,
    lookup,
)
from .parser import resolve_reference
from .printer import format_text
from .splice import TextEdit

JSONRPC = "2.0"

ERROR_PARSE = -32700
ERROR_INVALID_REQUEST = -32600
ERROR_METHOD_NOT_FOUND = -32601
ERROR_INVALID_PARAMS = -32602
ERROR_NOT_INITIALIZED = -32002

SERVER_NAME = "hybridls"

CAPABILITIES = {
    "textDocumentSync": 1,  # full-document sync
    "documentSymbolProvider": True,
    "definitionProvider": True,
    "documentFormattingProvider": True,
}


class FramingError(HybridlsError):
    """The byte stream does not follow the header framing."""


# ---------------------------------------------------------------------------
# Framing

def read_message(stream: BinaryIO) -> dict | None:
    """Read one framed message; None on clean end of stream."""
    content_length: int | None = None
    saw_header = False
    while True:
        line = _read_header_line(stream)
        if line is None:
            if saw_header:
                raise FramingError("stream ended inside a message header")
            return None
        saw_header = True
        if line == b"":
            break
        name, sep, value = line.partition(b":")
        if not sep:
            raise FramingError(f"malformed header line: {line!r}")
        if name.strip().lower() == b"content-length":
            try:
                content_length = int(value.strip())
            except ValueError as exc:
                raise FramingError(f"bad Content-Length: {value!r}") from exc
    if content_length is None or content_length < 0:
        raise FramingError("missing Content-Length header")
    body = b""
    while len(body) < content_length:
        chunk = stream.read(content_length - len(body))
        if not chunk:
            raise FramingError("stream ended inside a message body")
        body += chunk
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FramingError(f"message body is not valid JSON: {exc}") from exc


def _read_header_line(stream: BinaryIO) -> bytes | None:
    """One header line without its CRLF; None at end of stream."""
    line = bytearray()
    while True:
        byte = stream.read(1)
        if not byte:
            return None if not line else bytes(line)
        if byte == b"\n":
            if line and line[-1:] == b"\r":
                del line[-1]
            return bytes(line)
        line += byte


def encode_message(message: dict) -> bytes:
    body = json.dumps(message, separators=(",", ":"), sort_keys=True).encode("utf-8")
    return b"Content-Length: %d\r\n\r\n%s" % (len(body), body)


def write_message(stream: BinaryIO, message: dict) -> None:
    stream.write(encode_message(message))
    stream.flush()


# ---------------------------------------------------------------------------
# Position mapping

def _utf16_len(text: str) -> int:
    return sum(2 if ord(ch) > 0xFFFF else 1 for ch in text)


class LineIndex:
    """Bidirectional byte-offset / line-character mapping for one text."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.data = text.encode("utf-8")
        self.line_starts = [0]
        index = 0
        while index < len(self.data):
            byte = self.data[index]
            if byte == 0x0A:
                self.line_starts.append(index + 1)
            elif byte == 0x0D:
                if index + 1 < len(self.data) and self.data[index + 1] == 0x0A:
                    index += 1
                self.line_starts.append(index + 1)
            index += 1

    def position(self, offset: int) -> dict:
        offset = max(0, min(offset, len(self.data)))
        line = bisect_right(self.line_starts, offset) - 1
        prefix = self.data[self.line_starts[line] : offset].decode("utf-8")
        return {"line": line, "character": _utf16_len(prefix)}

    def offset(self, position: dict) -> int:
        line = position.get("line", 0)
        character = position.get("character", 0)
        if line < 0:
            return 0
        if line >= len(self.line_starts):
            return len(self.data)
        start = self.line_starts[line]
        end = (
            self.line_starts[line + 1]
            if line + 1 < len(self.line_starts)
            else len(self.data)
        )
        text = self.data[start:end].decode("utf-8").rstrip("\r\n")
        units = 0
        for index, ch in enumerate(text):
            if units >= character:
                return start + len(text[:index].encode("utf-8"))
            units += 2 if ord(ch) > 0xFFFF else 1
        return start + len(text.encode("utf-8"))

    def range(self, span: SourceSpan) -> dict:
        return {"start": self.position(span.start), "end": self.position(span.end)}


# ---------------------------------------------------------------------------
# Payload encoding

_SEVERITIES = {"error": 1, "warning": 2}

SYMBOL_KINDS = {
    KIND_MODEL: 2,
    KIND_PROTOCOL: 11,
    KIND_MSG: 24,
    KIND_CAPSULE: 5,
    KIND_PORT: 7,
    KIND_PART: 8,
    KIND_CONNECTOR: 25,
    KIND_SM: 3,
    KIND_INITIAL: 9,
    KIND_TRANS: 12,
}
SYMBOL_KIND_COMPOSITE = 10
SYMBOL_KIND_SIMPLE_STATE = 22


def encode_diagnostic(diag: Diagnostic, index: LineIndex) -> dict:
    return {
        "range": index.range(diag.span),
        "severity": _SEVERITIES.get(diag.severity, 1),
        "code": diag.code,
        "source": SERVER_NAME,
        "message": diag.message,
    }


def _symbol_name(element: Any) -> str:
    if isinstance(element, StateMachine):
        return "statemachine"
    if isinstance(element, InitialDecl):
        return "initial"
    if isinstance(element, ConnectorDecl):
        return f"{element.end_a.text()} to {element.end_b.text()}"
    if isinstance(element, TransitionDecl):
        return f"{element.source_name} -> {element.target_name}"
    return element.name


def _symbol_kind(kind: str, element: Any) -> int:
    if isinstance(element, StateDecl):
        return SYMBOL_KIND_COMPOSITE if element.composite else SYMBOL_KIND_SIMPLE_STATE
    return SYMBOL_KINDS[kind]


def document_symbols(doc: DocumentState, index: LineIndex) -> list[dict]:
    """Hierarchical symbols mirroring the element tree."""
    assert doc.model is not None
    entries = element_index(doc.model)

    def build(element_id: str) -> dict:
        element = lookup(doc.model, element_id)
        span = doc.spans.get(element_id)
        rng = index.range(span) if span else index.range(SourceSpan(0, 0))
        return {
            "name": _symbol_name(element),
            "kind": _symbol_kind(id_kind(element_id), element),
            "range": rng,
            "selectionRange": rng,
            "children": [build(child) for child in children_of(doc.model, element_id)],
        }

    roots = [entry.element_id for entry in entries.values() if entry.parent_id is None]
    return [build(root) for root in roots]


# ---------------------------------------------------------------------------
# Server

@dataclass
class LspServer:
    """Protocol state machine for one textual connection.

    ``send`` must accept a message object and hand it to the connection's
    writer without blocking; it is also invoked from hub callbacks on other
    threads.
    """

    hub: ModelHub
    send: Callable[[dict], None]
    initialized: bool = False
    shutdown_requested: bool = False
    exited: bool = False
    session: Session = field(init=False)
    _next_request_id: int = 0

    def __post_init__(self) -> None:
        self.session = self.hub.create_session(on_apply_edit=self._push_edit)

    def stop(self) -> None:
        self.hub.drop_session(self.session)

    # -- hub callback -------------------------------------------------------

    def _push_edit(self, uri: str, old_text: str, edits: list[TextEdit], revision: int) -> None:
        index = LineIndex(old_text)
        self._next_request_id += 1
        self.send(
            {
                "jsonrpc": JSONRPC,
                "id": f"{SERVER_NAME}-{self._next_request_id}",
                "method": "workspace/applyEdit",
                "params": {
                    "edit": {
                        "changes": {
                            uri: [
                                {"range": index.range(edit.span), "newText": edit.new_text}
                                for edit in edits
                            ]
                        }
                    }
                },
            }
        )

    # -- dispatch -----------------------------------------------------------

    def handle(self, message: dict) -> None:
        """Process one incoming message, emitting any responses through
        ``send``.  Unknown notifications are dropped; unknown requests get a
        method-not-found error."""
        if not isinstance(message, dict) or message.get("jsonrpc") != JSONRPC:
            self._maybe_error(message, ERROR_INVALID_REQUEST, "not a jsonrpc 2.0 message")
            return
        method = message.get("method")
        if method is None:
            return  # response to a server-initiated request; nothing to do
        message_id = message.get("id")
        is_request = message_id is not None
        try:
            self._route(method, message.get("params") or {}, message_id, is_request)
        except _InvalidParams as exc:
            if is_request:
                self._error(message_id, ERROR_INVALID_PARAMS, str(exc))

    def _route(self, method: str, params: dict, message_id: Any, is_request: bool) -> None:
        if method == "initialize":
            if self.initialized:
                self._error(message_id, ERROR_INVALID_REQUEST, "already initialized")
                return
            self.initialized = True
            self._result(
                message_id,
                {"capabilities": CAPABILITIES, "serverInfo": {"name": SERVER_NAME}},
            )
            return
        if method == "exit":
            self.exited = True
            return
        if not self.initialized:
            if is_request:
                self._error(message_id, ERROR_NOT_INITIALIZED, "server not initialized")
            return
        handler = {
            "initialized": lambda: None,
            "textDocument/didOpen": lambda: self._did_open(params),
            "textDocument/didChange": lambda: self._did_change(params),
            "textDocument/didClose": lambda: self._did_close(params),
            "textDocument/documentSymbol": lambda: self._document_symbol(params, message_id),
            "textDocument/definition": lambda: self._definition(params, message_id),
            "textDocument/formatting": lambda: self._formatting(params, message_id),
            "shutdown": lambda: self._shutdown(message_id),
        }.get(method)
        if handler is None:
            if is_request:
                self._error(message_id, ERROR_METHOD_NOT_FOUND, f"method not found: {method}")
            return
        handler()

    # -- replies ------------------------------------------------------------

    def _result(self, message_id: Any, result: Any) -> None:
        self.send({"jsonrpc": JSONRPC, "id": message_id, "result": result})

    def _error(self, message_id: Any, code: int, text: str) -> None:
        self.send(
            {
                "jsonrpc": JSONRPC,
                "id": message_id,
                "error": {"code": code, "message": text},
            }
        )

    def _maybe_error(self, message: Any, code: int, text: str) -> None:
        if isinstance(message, dict) and message.get("id") is not None:
            self._error(message["id"], code, text)

    def _publish_diagnostics(self, doc: DocumentState) -> None:
        index = LineIndex(doc.text)
        self.send(
            {
                "jsonrpc": JSONRPC,
                "method": "textDocument/publishDiagnostics",
                "params": {
                    "uri": doc.uri,
                    "version": doc.version,
                    "diagnostics": [
                        encode_diagnostic(diag, index) for diag in doc.diagnostics
                    ],
                },
            }
        )

    # -- text synchronization -----------------------------------------------

    def _did_open(self, params: dict) -> None:
        item = _field(params, "textDocument")
        uri, text = _field(item, "uri"), _field(item, "text")
        version = item.get("version", 0)
        try:
            doc = self.hub.open(uri, text, version)
        except AlreadyOpen:
            return
        self._publish_diagnostics(doc)

    def _did_change(self, params: dict) -> None:
        item = _field(params, "textDocument")
        uri = _field(item, "uri")
        version = item.get("version", 0)
        changes = _field(params, "contentChanges")
        if not isinstance(changes, list) or not changes:
            raise _InvalidParams("contentChanges must be a non-empty list")
        # full-document sync: the last change carries the complete text
        text = changes[-1].get("text")
        if text is None:
            raise _InvalidParams("only full-document changes are supported")
        try:
            doc = self.hub.change_text(uri, text, version)
        except (UnknownDocument, StaleVersion):
            return
        self._publish_diagnostics(doc)

    def _did_close(self, params: dict) -> None:
        uri = _field(_field(params, "textDocument"), "uri")
        try:
            self.hub.close(uri)
        except UnknownDocument:
            return

    # -- language features --------------------------------------------------

    def _doc_or_none(self, uri: str) -> DocumentState | None:
        try:
            doc = self.hub.snapshot(uri)
        except UnknownDocument:
            return None
        if doc.stale or doc.model is None:
            return None
        return doc

    def _document_symbol(self, params: dict, message_id: Any) -> None:
        uri = _field(_field(params, "textDocument"), "uri")
        doc = self._doc_or_none(uri)
        if doc is None:
            self._result(message_id, [])
            return
        self._result(message_id, document_symbols(doc, LineIndex(doc.text)))

    def _definition(self, params: dict, message_id: Any) -> None:
        uri = _field(_field(params, "textDocument"), "uri")
        position = _field(params, "position")
        doc = self._doc_or_none(uri)
        if doc is None:
            self._result(message_id, None)
            return
        index = LineIndex(doc.text)
        offset = index.offset(position)
        for site in doc.references:
            if site.span.start <= offset < site.span.end:
                target = resolve_reference(doc.model, site)
                if target is None:
                    break
                span = doc.spans.get(target)
                if span is None:
                    break
                self._result(message_id, {"uri": uri, "range": index.range(span)})
                return
        self._result(message_id, None)

    def _formatting(self, params: dict, message_id: Any) -> None:
        uri = _field(_field(params, "textDocument"), "uri")
        doc = self._doc_or_none(uri)
        if doc is None:
            self._result(message_id, None)
            return
        formatted, diagnostics = format_text(doc.text)
        if formatted is None:
            self._result(message_id, None)
            return
        index = LineIndex(doc.text)
        whole = index.range(SourceSpan(0, len(index.data)))
        self._result(message_id, [{"range": whole, "newText": formatted}])

    def _shutdown(self, message_id: Any) -> None:
        self.shutdown_requested = True
        self._result(message_id, None)


class _InvalidParams(Exception):
    pass


def _field(value: Any, name: str) -> Any:
    if not isinstance(value, dict) or name not in value:
        raise _InvalidParams(f"missing field: {name}")
    return value[name]


# ---------------------------------------------------------------------------
# Connection loop

def serve_stream(hub: ModelHub, reader: BinaryIO, writer: BinaryIO) -> None:
    """Serve one connection until exit or end of stream.

    Outgoing messages are funneled through a queue drained by a writer
    thread, so hub callbacks triggered from other connections can push
    server-to-client requests without blocking the hub.
    """
    import queue
    import threading

    outbox: queue.SimpleQueue = queue.SimpleQueue()
    server = LspServer(hub, outbox.put)

    def drain() -> None:
        while True:
            message = outbox.get()
            if message is None:
                return
            try:
                write_message(writer, message)
            except (OSError, ValueError):
                return

    thread = threading.Thread(target=drain, name="lsp-writer", daemon=True)
    thread.start()
    try:
        while not server.exited:
            try:
                message = read_message(reader)
            except FramingError:
                break
            if message is None:
                break
            server.handle(message)
    finally:
        server.stop()
        outbox.put(None)
        thread.join(timeout=5)
