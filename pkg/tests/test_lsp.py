"""Textual endpoint: framing, position mapping and request handling."""

from __future__ import annotations

import io

import pytest

from hybridls.hub import ModelHub
from hybridls.lsp import (
    CAPABILITIES,
    FramingError,
    LineIndex,
    LspServer,
    encode_diagnostic,
    encode_message,
    read_message,
)
from hybridls.model import Diagnostic, SourceSpan
from hybridls.mutations import ADD_STATE, Mutation
from hybridls.parser import parse
from hybridls.printer import serialize

URI = "file:///demo.rt"


# ---------------------------------------------------------------------------
# Framing

def test_frame_round_trip():
    payload = {"jsonrpc": "2.0", "id": 1, "method": "x", "params": {"a": [1, 2]}}
    stream = io.BytesIO(encode_message(payload))
    assert read_message(stream) == payload
    assert read_message(stream) is None


def test_minimal_frame():
    stream = io.BytesIO(b"Content-Length: 2\r\n\r\n{}")
    assert read_message(stream) == {}


def test_extra_headers_and_case():
    stream = io.BytesIO(b"Content-Type: application/json\r\ncontent-length: 2\r\n\r\n{}")
    assert read_message(stream) == {}


def test_framing_errors():
    for raw in (
        b"\r\n{}",  # no Content-Length
        b"Content-Length: nope\r\n\r\n{}",
        b"Content-Length: 10\r\n\r\n{}",  # truncated body
        b"garbage line\r\n\r\n{}",  # header without a colon
        b"Content-Length: 2\r\n\r\n,,",  # body is not JSON
    ):
        with pytest.raises(FramingError):
            read_message(io.BytesIO(raw))


def test_encode_is_compact_and_sorted():
    data = encode_message({"b": 1, "a": 2, "jsonrpc": "2.0"})
    assert data == b'Content-Length: 29\r\n\r\n{"a":2,"b":1,"jsonrpc":"2.0"}'


# ---------------------------------------------------------------------------
# Position mapping

def test_line_index_ascii():
    index = LineIndex("model M {\n}\n")
    assert index.position(0) == {"line": 0, "character": 0}
    assert index.position(6) == {"line": 0, "character": 6}
    assert index.position(10) == {"line": 1, "character": 0}
    assert index.offset({"line": 1, "character": 0}) == 10
    assert index.range(SourceSpan(0, 11)) == {
        "start": {"line": 0, "character": 0},
        "end": {"line": 1, "character": 1},
    }


def test_line_index_astral_characters():
    # one astral char: 4 utf-8 bytes but 2 utf-16 units
    text = "ab\U0001d11ecd\nxyz"
    index = LineIndex(text)
    byte_of_c = len("ab\U0001d11e".encode("utf-8"))
    assert byte_of_c == 6
    assert index.position(byte_of_c) == {"line": 0, "character": 4}
    assert index.offset({"line": 0, "character": 4}) == 6
    assert index.position(len(text.encode("utf-8"))) == {"line": 1, "character": 3}


def test_line_index_crlf_and_clamping():
    index = LineIndex("a\r\nb")
    assert index.position(3) == {"line": 1, "character": 0}
    assert index.position(999) == {"line": 1, "character": 1}
    assert index.offset({"line": 99, "character": 0}) == 4
    assert index.offset({"line": 0, "character": 99}) == 1  # stops before the CRLF


def test_encode_diagnostic_severities():
    index = LineIndex("abc")
    err = encode_diagnostic(Diagnostic("E101", "error", SourceSpan(0, 1), "dup"), index)
    assert err == {
        "range": {"start": {"line": 0, "character": 0}, "end": {"line": 0, "character": 1}},
        "severity": 1,
        "code": "E101",
        "source": "hybridls",
        "message": "dup",
    }
    warn = encode_diagnostic(Diagnostic("E999", "warning", SourceSpan(1, 2), "w"), index)
    assert warn["severity"] == 2


# ---------------------------------------------------------------------------
# Server behavior

@pytest.fixture
def server():
    sent: list[dict] = []
    hub = ModelHub()
    srv = LspServer(hub, sent.append)
    return srv, sent, hub


def _initialize(srv, sent):
    srv.handle({"jsonrpc": "2.0", "id": 0, "method": "initialize", "params": {}})
    sent.clear()


def _open(srv, text, version=0, uri=URI):
    srv.handle(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didOpen",
            "params": {"textDocument": {"uri": uri, "text": text, "version": version}},
        }
    )


def test_requests_before_initialize_are_rejected(server):
    srv, sent, _ = server
    srv.handle({"jsonrpc": "2.0", "id": 7, "method": "shutdown"})
    assert sent == [
        {"jsonrpc": "2.0", "id": 7, "error": {"code": -32002, "message": "server not initialized"}}
    ]
    sent.clear()
    # notifications before initialize are dropped silently
    srv.handle({"jsonrpc": "2.0", "method": "textDocument/didOpen", "params": {}})
    assert sent == []


def test_initialize_result(server):
    srv, sent, _ = server
    srv.handle({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}})
    assert sent == [
        {
            "jsonrpc": "2.0",
            "id": 1,
            "result": {
                "capabilities": {
                    "textDocumentSync": 1,
                    "documentSymbolProvider": True,
                    "definitionProvider": True,
                    "documentFormattingProvider": True,
                },
                "serverInfo": {"name": "hybridls"},
            },
        }
    ]
    assert sent[0]["result"]["capabilities"] == CAPABILITIES
    sent.clear()
    srv.handle({"jsonrpc": "2.0", "id": 2, "method": "initialize", "params": {}})
    assert sent[0]["error"]["code"] == -32600


def test_did_open_publishes_once(server, ping_pong_text):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text, version=3)
    assert len(sent) == 1
    message = sent[0]
    assert message["method"] == "textDocument/publishDiagnostics"
    assert message["params"] == {"uri": URI, "version": 3, "diagnostics": []}
    sent.clear()
    _open(srv, ping_pong_text)  # duplicate open is ignored
    assert sent == []


def test_did_open_reports_errors(server):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, "model M {\ncapsule C {\n  port p : Gone;\n}\n}\n")
    (message,) = sent
    (diag,) = message["params"]["diagnostics"]
    assert diag["code"] == "E102"
    assert diag["severity"] == 1
    assert diag["source"] == "hybridls"
    assert diag["range"]["start"]["line"] == 2


def test_did_change_publishes_and_checks_version(server, ping_pong_text):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text, version=1)
    sent.clear()
    srv.handle(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": URI, "version": 2},
                "contentChanges": [{"text": "model M {\n}\n"}],
            },
        }
    )
    assert len(sent) == 1
    assert sent[0]["params"]["version"] == 2
    sent.clear()
    # stale version: dropped without output
    srv.handle(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": URI, "version": 2},
                "contentChanges": [{"text": "model N {\n}\n"}],
            },
        }
    )
    assert sent == []


def test_document_symbol_tree(server, ping_pong_text):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text)
    sent.clear()
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 4,
            "method": "textDocument/documentSymbol",
            "params": {"textDocument": {"uri": URI}},
        }
    )
    (root,) = sent[0]["result"]
    assert (root["name"], root["kind"]) == ("M", 2)
    assert [(c["name"], c["kind"]) for c in root["children"]] == [
        ("PingPong", 11),
        ("Controller", 5),
        ("Worker", 5),
    ]
    protocol, controller, _ = root["children"]
    assert [(c["name"], c["kind"]) for c in protocol["children"]] == [
        ("ping", 24),
        ("pong", 24),
    ]
    assert [(c["name"], c["kind"]) for c in controller["children"]] == [
        ("p", 7),
        ("w", 8),
        ("p to w.q", 25),
        ("statemachine", 3),
    ]
    machine = controller["children"][3]
    assert [(c["name"], c["kind"]) for c in machine["children"]] == [
        ("initial", 9),
        ("Idle", 22),
        ("Pinging", 22),
        ("Waiting", 22),
        ("Idle -> Pinging", 12),
        ("Pinging -> Waiting", 12),
        ("Waiting -> Idle", 12),
    ]
    for symbol in machine["children"]:
        assert symbol["selectionRange"] == symbol["range"]


def test_document_symbol_marks_composites(server):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, "model M {\ncapsule C {\n  statemachine {\n    state A {\n      state B;\n    }\n  }\n}\n}\n")
    sent.clear()
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 1,
            "method": "textDocument/documentSymbol",
            "params": {"textDocument": {"uri": URI}},
        }
    )
    (root,) = sent[0]["result"]
    machine = root["children"][0]["children"][0]
    composite = machine["children"][0]
    assert (composite["name"], composite["kind"]) == ("A", 10)
    assert [(c["name"], c["kind"]) for c in composite["children"]] == [("B", 22)]


def test_definition_resolves_part_type(server, ping_pong_text):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text)
    sent.clear()
    index = LineIndex(ping_pong_text)
    position = index.position(ping_pong_text.index("Worker;"))
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 9,
            "method": "textDocument/definition",
            "params": {"textDocument": {"uri": URI}, "position": position},
        }
    )
    spans = parse(ping_pong_text).spans
    assert sent[0]["result"] == {
        "uri": URI,
        "range": index.range(spans["capsule:M.Worker"]),
    }
    sent.clear()
    # a position on plain syntax resolves to nothing
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 10,
            "method": "textDocument/definition",
            "params": {"textDocument": {"uri": URI}, "position": {"line": 0, "character": 0}},
        }
    )
    assert sent[0]["result"] is None


def test_formatting_returns_whole_document_edit(server):
    messy = "model   M{   capsule C {}}"
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, messy)
    sent.clear()
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 5,
            "method": "textDocument/formatting",
            "params": {"textDocument": {"uri": URI}, "options": {}},
        }
    )
    (edit,) = sent[0]["result"]
    assert edit["newText"] == "model M {\ncapsule C {\n}\n}\n"
    assert edit["range"]["start"] == {"line": 0, "character": 0}
    assert edit["range"]["end"] == {"line": 0, "character": len(messy)}


def test_features_degrade_on_stale_text(server, ping_pong_text):
    srv, sent, _ = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text, version=1)
    srv.handle(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": URI, "version": 2},
                "contentChanges": [{"text": "model M {"}],
            },
        }
    )
    sent.clear()
    for message_id, method in ((1, "documentSymbol"), (2, "definition"), (3, "formatting")):
        srv.handle(
            {
                "jsonrpc": "2.0",
                "id": message_id,
                "method": f"textDocument/{method}",
                "params": {
                    "textDocument": {"uri": URI},
                    "position": {"line": 0, "character": 0},
                },
            }
        )
    assert [m["result"] for m in sent] == [[], None, None]


def test_unknown_method_and_responses(server):
    srv, sent, _ = server
    _initialize(srv, sent)
    srv.handle({"jsonrpc": "2.0", "id": 3, "method": "workspace/symbol", "params": {}})
    assert sent[0]["error"]["code"] == -32601
    sent.clear()
    srv.handle({"jsonrpc": "2.0", "method": "some/notification"})
    assert sent == []
    # a response to one of our own requests is consumed silently
    srv.handle({"jsonrpc": "2.0", "id": "hybridls-1", "result": {"applied": True}})
    assert sent == []


def test_invalid_params_on_request(server):
    srv, sent, _ = server
    _initialize(srv, sent)
    srv.handle({"jsonrpc": "2.0", "id": 2, "method": "textDocument/documentSymbol", "params": {}})
    assert sent[0]["error"]["code"] == -32602


def test_shutdown_and_exit(server):
    srv, sent, _ = server
    _initialize(srv, sent)
    srv.handle({"jsonrpc": "2.0", "id": 9, "method": "shutdown"})
    assert sent == [{"jsonrpc": "2.0", "id": 9, "result": None}]
    assert srv.shutdown_requested is True
    assert srv.exited is False
    srv.handle({"jsonrpc": "2.0", "method": "exit"})
    assert srv.exited is True


def test_graph_edit_pushed_as_apply_edit(server, ping_pong_text):
    srv, sent, hub = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text, version=1)
    old_text = ping_pong_text
    sent.clear()
    outcome = hub.graph_operation(
        URI,
        "behavior:M.Controller",
        Mutation(ADD_STATE, "sm:M.Controller.sm", {"name": "Extra"}),
    )
    assert outcome.accepted is True
    (request,) = sent
    assert request["id"] == "hybridls-1"
    assert request["method"] == "workspace/applyEdit"
    (change,) = request["params"]["edit"]["changes"][URI]
    # applying the pushed range edit to the old text yields the hub's text
    index = LineIndex(old_text)
    start = index.offset(change["range"]["start"])
    end = index.offset(change["range"]["end"])
    patched = old_text[:start] + change["newText"] + old_text[end:]
    assert patched == hub.snapshot(URI).text
    assert "state Extra;" in patched


def test_did_close_releases_document(server, ping_pong_text):
    srv, sent, hub = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text)
    srv.handle(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didClose",
            "params": {"textDocument": {"uri": URI}},
        }
    )
    assert hub.open_uris() == []


def test_serialize_canonical_is_formatting_noop(server, ping_pong_text):
    srv, sent, hub = server
    _initialize(srv, sent)
    _open(srv, ping_pong_text)
    sent.clear()
    srv.handle(
        {
            "jsonrpc": "2.0",
            "id": 1,
            "method": "textDocument/formatting",
            "params": {"textDocument": {"uri": URI}},
        }
    )
    (edit,) = sent[0]["result"]
    assert edit["newText"] == serialize(parse(ping_pong_text).model) == ping_pong_text
