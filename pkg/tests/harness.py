"""Scripted dual-endpoint session with a deterministic transcript.

Drives one textual client (over the ``/text`` WebSocket bridge) and one
graphical client (over ``/graph``) against a live server and logs every
message as ``<arrow> <channel> <compact json>``.  The read schedule is fixed
per channel, each connection writes in FIFO order, and no line contains
ports, timestamps or other run-dependent data, so the transcript of a run
is reproducible byte for byte.
"""

from __future__ import annotations

import io
import socket
from dataclasses import dataclass, field

from websockets.sync.client import ClientConnection, connect

from hybridls.glsp import dumps
from hybridls.hub import ModelHub
from hybridls.lsp import encode_message, read_message
from hybridls.server import start_graph_ws

URI = "file:///transcript/ping-pong.rt"

EXTRA_STATE = "    state Extra {\n      state Inner;\n    }\n"


def free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


@dataclass
class TranscriptSession:
    """Two live client connections sharing one transcript."""

    graph: ClientConnection
    text: ClientConnection
    lines: list[str] = field(default_factory=list)

    def close(self) -> None:
        self.graph.close()
        self.text.close()

    def _log(self, arrow: str, channel: str, message: dict) -> None:
        self.lines.append(f"{arrow} {channel} {dumps(message)}")

    def send_graph(self, message: dict) -> None:
        self._log("->", "graph", message)
        self.graph.send(dumps(message))

    def send_text(self, message: dict) -> None:
        self._log("->", "text", message)
        self.text.send(encode_message(message))

    def recv_graph(self) -> dict:
        import json

        message = json.loads(self.graph.recv(timeout=10))
        self._log("<-", "graph", message)
        return message

    def recv_text(self) -> dict:
        message = read_message(io.BytesIO(self.text.recv(timeout=10)))
        self._log("<-", "text", message)
        return message

    def transcript(self) -> str:
        return "\n".join(self.lines) + "\n"


def run_scenario(base_text: str) -> str:
    """One complete hybrid editing session; returns its transcript.

    The scenario exercises both directions of synchronization: a textual
    change refreshing a graph subscription, a graph operation pushing a text
    edit, a drill-down by click, and a textual deletion invalidating the
    drilled view.
    """
    hub = ModelHub()
    port = free_port()
    server = start_graph_ws(hub, "127.0.0.1", port)
    session = TranscriptSession(
        graph=connect(f"ws://127.0.0.1:{port}/graph"),
        text=connect(f"ws://127.0.0.1:{port}/text"),
    )
    try:
        _script(session, base_text)
        return session.transcript()
    finally:
        session.close()
        server.shutdown()


def _script(s: TranscriptSession, base_text: str) -> None:
    with_extra = base_text.replace("    state Waiting;\n", "    state Waiting;\n" + EXTRA_STATE)
    assert with_extra != base_text, "scenario text must contain the Waiting state"

    # textual client comes up and opens the document
    s.send_text({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}})
    s.recv_text()
    s.send_text(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didOpen",
            "params": {"textDocument": {"uri": URI, "text": base_text, "version": 0}},
        }
    )
    s.recv_text()  # publishDiagnostics

    # graphical client lists views and subscribes to the behavior view
    s.send_graph({"jsonrpc": "2.0", "id": 1, "method": "graph/listViews", "params": {"uri": URI}})
    s.recv_graph()
    s.send_graph(
        {
            "jsonrpc": "2.0",
            "id": 2,
            "method": "graph/requestModel",
            "params": {"uri": URI, "viewId": "behavior:M.Controller"},
        }
    )
    s.recv_graph()

    # textual edit adds a composite state; the graph view refreshes
    s.send_text(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": URI, "version": 1},
                "contentChanges": [{"text": with_extra}],
            },
        }
    )
    s.recv_text()  # publishDiagnostics
    s.recv_graph()  # graph/modelUpdated at revision 2

    # graph operation draws a transition; the text client gets the edit
    s.send_graph(
        {
            "jsonrpc": "2.0",
            "id": 3,
            "method": "graph/operation",
            "params": {
                "uri": URI,
                "viewId": "behavior:M.Controller",
                "expectedRevision": 2,
                "operation": {
                    "kind": "AddTransition",
                    "target": "sm:M.Controller.sm",
                    "payload": {"source": "Idle", "target": "Extra"},
                },
            },
        }
    )
    s.recv_graph()  # operation result, before the refresh
    s.recv_graph()  # graph/modelUpdated at revision 3
    push = s.recv_text()  # workspace/applyEdit
    s.send_text({"jsonrpc": "2.0", "id": push["id"], "result": {"applied": True}})

    # double-click on the composite drills into it
    s.send_graph(
        {
            "jsonrpc": "2.0",
            "id": 4,
            "method": "graph/switchView",
            "params": {
                "uri": URI,
                "viewId": "behavior:M.Controller",
                "clickedElementId": "state:M.Controller.sm.Extra",
            },
        }
    )
    s.recv_graph()

    # a textual deletion removes the composite; the drilled view goes stale
    s.send_text(
        {
            "jsonrpc": "2.0",
            "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": URI, "version": 2},
                "contentChanges": [{"text": base_text}],
            },
        }
    )
    s.recv_text()  # publishDiagnostics
    s.recv_graph()  # graph/viewStale for the vanished drill view
    s.send_graph({"jsonrpc": "2.0", "id": 5, "method": "graph/listViews", "params": {"uri": URI}})
    s.recv_graph()

    # orderly textual shutdown
    s.send_text({"jsonrpc": "2.0", "id": 2, "method": "shutdown", "params": {}})
    s.recv_text()
    s.send_text({"jsonrpc": "2.0", "method": "exit"})
