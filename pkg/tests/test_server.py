"""Both endpoints over real sockets on an ephemeral port."""

from __future__ import annotations

import io
import json
import socket
import urllib.error
import urllib.request

import pytest
from websockets.sync.client import connect

from hybridls.hub import ModelHub
from hybridls.lsp import encode_message, read_message
from hybridls.server import start_graph_ws, start_text_tcp

URI = "file:///demo.rt"


def _free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


@pytest.fixture
def graph_server(ping_pong_text, tmp_path):
    (tmp_path / "index.html").write_text("<html>hybrid client</html>")
    (tmp_path / "app.js").write_text("console.log('hi')")
    hub = ModelHub()
    hub.open(URI, ping_pong_text, version=0)
    port = _free_port()
    server = start_graph_ws(hub, "127.0.0.1", port, client_dir=tmp_path)
    yield hub, port
    server.shutdown()


def _rpc(ws, message_id, method, params):
    ws.send(json.dumps({"jsonrpc": "2.0", "id": message_id, "method": method, "params": params}))
    while True:
        reply = json.loads(ws.recv(timeout=5))
        if reply.get("id") == message_id:
            return reply


def test_graph_session_over_websocket(graph_server):
    hub, port = graph_server
    with connect(f"ws://127.0.0.1:{port}/graph") as ws:
        reply = _rpc(ws, 1, "graph/listViews", {"uri": URI})
        assert [v["viewId"] for v in reply["result"]][0] == "root"

        reply = _rpc(ws, 2, "graph/requestModel", {"uri": URI, "viewId": "behavior:M.Controller"})
        assert reply["result"]["revision"] == 1

        # a hub-side text change is pushed to the socket
        hub.change_text(URI, hub.snapshot(URI).text + "// x\n", version=1)
        note = json.loads(ws.recv(timeout=5))
        assert note["method"] == "graph/modelUpdated"
        assert note["params"]["revision"] == 2

        # wire text is compact with sorted keys
        ws.send(json.dumps({"jsonrpc": "2.0", "id": 3, "method": "graph/listViews", "params": {"uri": URI}}))
        raw = ws.recv(timeout=5)
        assert raw == json.dumps(json.loads(raw), separators=(",", ":"), sort_keys=True)


def test_graph_session_survives_junk(graph_server):
    _, port = graph_server
    with connect(f"ws://127.0.0.1:{port}/graph") as ws:
        ws.send("this is not json")
        reply = _rpc(ws, 1, "graph/listViews", {"uri": URI})
        assert "result" in reply


def test_text_bridge_over_websocket(graph_server):
    hub, port = graph_server
    with connect(f"ws://127.0.0.1:{port}/text") as ws:
        ws.send(encode_message({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}}))
        reply = read_message(io.BytesIO(ws.recv(timeout=5)))
        assert reply["result"]["serverInfo"] == {"name": "hybridls"}

        ws.send(
            encode_message(
                {
                    "jsonrpc": "2.0",
                    "method": "textDocument/didOpen",
                    "params": {
                        "textDocument": {"uri": "file:///b.rt", "text": "model B {\n}\n", "version": 0}
                    },
                }
            )
        )
        note = read_message(io.BytesIO(ws.recv(timeout=5)))
        assert note["method"] == "textDocument/publishDiagnostics"
        assert note["params"]["diagnostics"] == []
        assert "file:///b.rt" in hub.open_uris()


def test_static_files(graph_server):
    _, port = graph_server
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/") as response:
        assert response.status == 200
        assert b"hybrid client" in response.read()
        assert response.headers["Content-Type"] == "text/html"
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/app.js") as response:
        assert "javascript" in response.headers["Content-Type"]
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(f"http://127.0.0.1:{port}/missing.css")
    assert err.value.code == 404
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(f"http://127.0.0.1:{port}/../../etc/passwd")
    assert err.value.code == 404


def test_static_404_without_client_dir(ping_pong_text):
    hub = ModelHub()
    port = _free_port()
    server = start_graph_ws(hub, "127.0.0.1", port)
    try:
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(f"http://127.0.0.1:{port}/")
        assert err.value.code == 404
    finally:
        server.shutdown()


def test_text_over_tcp(ping_pong_text):
    hub = ModelHub()
    port = _free_port()
    server = start_text_tcp(hub, "127.0.0.1", port)
    try:
        with socket.create_connection(("127.0.0.1", port), timeout=5) as sock:
            writer = sock.makefile("wb")
            reader = sock.makefile("rb")
            writer.write(encode_message({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}}))
            writer.flush()
            reply = read_message(reader)
            assert reply["result"]["capabilities"]["textDocumentSync"] == 1

            writer.write(
                encode_message(
                    {
                        "jsonrpc": "2.0",
                        "method": "textDocument/didOpen",
                        "params": {"textDocument": {"uri": URI, "text": ping_pong_text, "version": 0}},
                    }
                )
            )
            writer.flush()
            note = read_message(reader)
            assert note["method"] == "textDocument/publishDiagnostics"
            assert URI in hub.open_uris()
    finally:
        server.shutdown()


def test_both_endpoints_share_one_hub(graph_server):
    hub, port = graph_server
    with connect(f"ws://127.0.0.1:{port}/graph") as graph_ws, connect(
        f"ws://127.0.0.1:{port}/text"
    ) as text_ws:
        text_ws.send(encode_message({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}}))
        read_message(io.BytesIO(text_ws.recv(timeout=5)))

        _rpc(graph_ws, 1, "graph/requestModel", {"uri": URI, "viewId": "behavior:M.Controller"})
        reply = _rpc(
            graph_ws,
            2,
            "graph/operation",
            {
                "uri": URI,
                "viewId": "behavior:M.Controller",
                "expectedRevision": 1,
                "operation": {
                    "kind": "AddState",
                    "target": "sm:M.Controller.sm",
                    "payload": {"name": "Extra"},
                },
            },
        )
        assert reply["result"]["accepted"] is True

        # the graph client gets its refresh, the text client the applyEdit
        note = json.loads(graph_ws.recv(timeout=5))
        assert note["method"] == "graph/modelUpdated"
        push = read_message(io.BytesIO(text_ws.recv(timeout=5)))
        assert push["method"] == "workspace/applyEdit"
        assert push["id"] == "hybridls-1"
        assert "state Extra;" in hub.snapshot(URI).text
