"""Hosting for both endpoints over one shared hub.

The textual endpoint runs over stdio or a TCP port with standard header
framing.  The graphical endpoint runs over WebSocket; its port also serves
two extras for browser clients: a ``/text`` route bridging the framed
textual protocol inside WebSocket messages, and (when a client directory is
configured) the static client files over plain HTTP.
"""

from __future__ import annotations

import io
import json
import logging
import mimetypes
import queue
import socketserver
import threading
from pathlib import Path

from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Request, Response
from websockets.sync.server import Server, ServerConnection, serve

from .glsp import GlspServer, dumps
from .hub import ModelHub
from .lsp import LspServer, encode_message, read_message, serve_stream

log = logging.getLogger("hybridls.server")

GRAPH_PATH = "/graph"
TEXT_PATH = "/text"


# ---------------------------------------------------------------------------
# Textual endpoint over TCP

class _TextHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        log.info("text connection from %s", self.client_address)
        reader = self.request.makefile("rb")
        writer = self.request.makefile("wb")
        try:
            serve_stream(self.server.hub, reader, writer)
        finally:
            log.info("text connection closed %s", self.client_address)


class TextTcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, hub: ModelHub, host: str, port: int) -> None:
        super().__init__((host, port), _TextHandler)
        self.hub = hub


def start_text_tcp(hub: ModelHub, host: str, port: int) -> TextTcpServer:
    server = TextTcpServer(hub, host, port)
    thread = threading.Thread(
        target=server.serve_forever, name="text-tcp", daemon=True
    )
    thread.start()
    return server


# ---------------------------------------------------------------------------
# Graph endpoint over WebSocket

def _graph_session(hub: ModelHub, connection: ServerConnection) -> None:
    outbox: queue.SimpleQueue = queue.SimpleQueue()
    server = GlspServer(hub, outbox.put)

    def drain() -> None:
        while True:
            message = outbox.get()
            if message is None:
                return
            try:
                connection.send(dumps(message))
            except ConnectionClosed:
                return

    writer = threading.Thread(target=drain, name="graph-writer", daemon=True)
    writer.start()
    try:
        while True:
            try:
                raw = connection.recv()
            except ConnectionClosed:
                break
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8", errors="replace")
            try:
                message = json.loads(raw)
            except ValueError:
                log.info("dropping non-JSON graph message")
                continue
            server.handle(message)
    finally:
        server.stop()
        outbox.put(None)
        writer.join(timeout=5)


def _text_bridge_session(hub: ModelHub, connection: ServerConnection) -> None:
    """The framed textual protocol carried one message per WebSocket frame."""
    outbox: queue.SimpleQueue = queue.SimpleQueue()
    server = LspServer(hub, outbox.put)

    def drain() -> None:
        while True:
            message = outbox.get()
            if message is None:
                return
            try:
                connection.send(encode_message(message))
            except ConnectionClosed:
                return

    writer = threading.Thread(target=drain, name="text-bridge-writer", daemon=True)
    writer.start()
    try:
        while not server.exited:
            try:
                raw = connection.recv()
            except ConnectionClosed:
                break
            if isinstance(raw, str):
                raw = raw.encode("utf-8")
            try:
                message = read_message(io.BytesIO(raw))
            except Exception:
                log.info("dropping malformed framed message on text bridge")
                continue
            if message is None:
                continue
            server.handle(message)
    finally:
        server.stop()
        outbox.put(None)
        writer.join(timeout=5)


def _static_response(client_dir: Path, path: str) -> Response:
    name = path.lstrip("/") or "index.html"
    target = (client_dir / name).resolve()
    if not target.is_relative_to(client_dir.resolve()) or not target.is_file():
        return Response(404, "Not Found", Headers({"Content-Type": "text/plain"}), b"not found\n")
    content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
    body = target.read_bytes()
    headers = Headers(
        {"Content-Type": content_type, "Content-Length": str(len(body))}
    )
    return Response(200, "OK", headers, body)


def start_graph_ws(
    hub: ModelHub, host: str, port: int, client_dir: Path | None = None
) -> Server:
    """Serve the graph protocol on ``/graph``, the textual bridge on
    ``/text`` and, when configured, static client files on other paths."""

    def handler(connection: ServerConnection) -> None:
        path = connection.request.path.split("?")[0]
        log.info("graph-port connection on %s from %s", path, connection.remote_address)
        if path == TEXT_PATH:
            _text_bridge_session(hub, connection)
        else:
            _graph_session(hub, connection)

    def process_request(connection: ServerConnection, request: Request) -> Response | None:
        path = request.path.split("?")[0]
        if path in (GRAPH_PATH, TEXT_PATH):
            return None
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # websocket on an unrouted path still gets a session
        if client_dir is not None:
            return _static_response(client_dir, path)
        return Response(
            404, "Not Found", Headers({"Content-Type": "text/plain"}), b"not found\n"
        )

    server = serve(handler, host, port, process_request=process_request)
    thread = threading.Thread(target=server.serve_forever, name="graph-ws", daemon=True)
    thread.start()
    return server
