"""Graphical endpoint: a JSON-RPC graph protocol over WebSocket.

Clients request view lists, palettes and positioned graphs, issue palette
operations against an expected revision, and receive ``graph/modelUpdated``
and ``graph/viewStale`` notifications for their subscribed views.  The wire
format is plain JSON so that any diagram front end can consume it; all
geometry comes from the server, never the client.

A response to a request is always written before the notifications that the
request itself triggered on the same connection.
"""

from __future__ import annotations

import json
import threading
from typing import Any, Callable

from .errors import (
    DocumentStale,
    HybridlsError,
    MalformedInput,
    NotDrillable,
    PaletteViolation,
    StaleRevision,
    UnknownDocument,
    UnknownView,
)
from .hub import ModelHub, Session, SyncOutcome
from .model import Diagnostic
from .mutations import mutation_from_json
from .views import GEdge, GGraph, GNode, PaletteItem, ViewDescriptor, walk_nodes

JSONRPC = "2.0"

ERROR_UNKNOWN_DOCUMENT = 1001
ERROR_UNKNOWN_VIEW = 1002
ERROR_STALE_REVISION = 1003
ERROR_DOCUMENT_STALE = 1004
ERROR_PALETTE_VIOLATION = 1005
ERROR_NOT_DRILLABLE = 1006
ERROR_MUTATION_REJECTED = 1007

ERROR_INVALID_REQUEST = -32600
ERROR_METHOD_NOT_FOUND = -32601
ERROR_INVALID_PARAMS = -32602

_ERROR_CODES = {
    UnknownDocument: ERROR_UNKNOWN_DOCUMENT,
    UnknownView: ERROR_UNKNOWN_VIEW,
    StaleRevision: ERROR_STALE_REVISION,
    DocumentStale: ERROR_DOCUMENT_STALE,
    PaletteViolation: ERROR_PALETTE_VIOLATION,
    NotDrillable: ERROR_NOT_DRILLABLE,
}


# ---------------------------------------------------------------------------
# Wire encoding

def _num(value: float) -> float | int:
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _encode_bounds(node: GNode) -> dict:
    if node.bounds is None:
        return {"x": 0, "y": 0, "w": 0, "h": 0}
    return {
        "x": _num(node.bounds.x),
        "y": _num(node.bounds.y),
        "w": _num(node.bounds.w),
        "h": _num(node.bounds.h),
    }


def _encode_node(node: GNode) -> dict:
    encoded = {
        "id": node.id,
        "sourceId": node.source_id,
        "type": node.kind,
        "label": node.label,
        "bounds": _encode_bounds(node),
        "children": [_encode_node(child) for child in node.children],
    }
    if node.drill_target is not None:
        encoded["drillTarget"] = node.drill_target
    return encoded


def _encode_edge(edge: GEdge) -> dict:
    return {
        "id": edge.id,
        "sourceId": edge.source_id,
        "type": edge.kind,
        "sourceNodeId": edge.source_node_id,
        "targetNodeId": edge.target_node_id,
        "label": edge.label,
        "routingPoints": [
            {"x": _num(point.x), "y": _num(point.y)} for point in edge.routing_points
        ],
    }


def encode_graph(graph: GGraph) -> dict:
    return {
        "viewId": graph.view_id,
        "revision": graph.revision,
        "elements": [
            _encode_node(e) if isinstance(e, GNode) else _encode_edge(e)
            for e in graph.elements
        ],
    }


def encode_view(view: ViewDescriptor) -> dict:
    return {"viewId": view.view_id, "title": view.title, "category": view.category}


def encode_palette_item(item: PaletteItem) -> dict:
    return {
        "operation": item.operation_kind,
        "label": item.label,
        "argumentSchema": [
            {"name": name, "type": kind} for name, kind in item.argument_schema
        ],
    }


def encode_diagnostic(diag: Diagnostic) -> dict:
    return {
        "code": diag.code,
        "severity": diag.severity,
        "message": diag.message,
        "span": {"start": diag.span.start, "end": diag.span.end},
    }


def dumps(message: dict) -> str:
    return json.dumps(message, separators=(",", ":"), sort_keys=True)


# ---------------------------------------------------------------------------
# Protocol state machine

class GlspServer:
    """One graphical connection.

    ``send`` receives message objects; notifications triggered while a
    request is being handled are held back until after its response.
    """

    def __init__(self, hub: ModelHub, send: Callable[[dict], None]) -> None:
        self.hub = hub
        self._send = send
        self._lock = threading.Lock()
        self._staged: list[dict] = []
        self._in_request = False
        self.session: Session = hub.create_session(
            on_model_updated=self._on_model_updated,
            on_view_stale=self._on_view_stale,
        )

    def stop(self) -> None:
        self.hub.drop_session(self.session)

    # -- hub callbacks ------------------------------------------------------

    def _on_model_updated(self, uri: str, view_id: str, revision: int, graph: GGraph) -> None:
        self._notify(
            {
                "jsonrpc": JSONRPC,
                "method": "graph/modelUpdated",
                "params": {
                    "uri": uri,
                    "viewId": view_id,
                    "revision": revision,
                    "graph": encode_graph(graph),
                },
            }
        )

    def _on_view_stale(self, uri: str, view_id: str, revision: int) -> None:
        self._notify(
            {
                "jsonrpc": JSONRPC,
                "method": "graph/viewStale",
                "params": {"uri": uri, "viewId": view_id},
            }
        )

    def _notify(self, message: dict) -> None:
        with self._lock:
            if self._in_request:
                self._staged.append(message)
                return
        self._send(message)

    # -- dispatch -----------------------------------------------------------

    def handle(self, message: dict) -> None:
        with self._lock:
            self._in_request = True
        try:
            response = self._respond(message)
        finally:
            with self._lock:
                staged = self._staged
                self._staged = []
                self._in_request = False
        if response is not None:
            self._send(response)
        for notification in staged:
            self._send(notification)

    def _respond(self, message: Any) -> dict | None:
        if not isinstance(message, dict) or message.get("jsonrpc") != JSONRPC:
            return None
        message_id = message.get("id")
        method = message.get("method")
        if method is None:
            return None
        params = message.get("params") or {}
        try:
            result = self._route(method, params)
        except _WireError as exc:
            return self._error(message_id, exc.code, str(exc), exc.data)
        except HybridlsError as exc:
            code = _ERROR_CODES.get(type(exc), ERROR_INVALID_PARAMS)
            return self._error(message_id, code, str(exc))
        if message_id is None:
            return None
        return {"jsonrpc": JSONRPC, "id": message_id, "result": result}

    def _error(self, message_id: Any, code: int, text: str, data: Any = None) -> dict | None:
        if message_id is None:
            return None
        error: dict[str, Any] = {"code": code, "message": text}
        if data is not None:
            error["data"] = data
        return {"jsonrpc": JSONRPC, "id": message_id, "error": error}

    def _route(self, method: str, params: dict) -> Any:
        if method == "graph/listViews":
            uri = _field(params, "uri")
            return [encode_view(v) for v in self.hub.views_of(uri)]
        if method == "graph/requestModel":
            uri = _field(params, "uri")
            view_id = _field(params, "viewId")
            return encode_graph(self.hub.subscribe(self.session, uri, view_id))
        if method == "graph/requestPalette":
            uri = _field(params, "uri")
            view_id = _field(params, "viewId")
            return [encode_palette_item(i) for i in self.hub.palette(uri, view_id)]
        if method == "graph/operation":
            return self._operation(params)
        if method == "graph/switchView":
            return self._switch_view(params)
        raise _WireError(ERROR_METHOD_NOT_FOUND, f"method not found: {method}")

    def _operation(self, params: dict) -> dict:
        uri = _field(params, "uri")
        view_id = _field(params, "viewId")
        try:
            mutation = mutation_from_json(_field(params, "operation"))
        except MalformedInput as exc:
            raise _WireError(ERROR_INVALID_PARAMS, str(exc)) from exc
        outcome: SyncOutcome = self.hub.graph_operation(
            uri, view_id, mutation, params.get("expectedRevision")
        )
        if not outcome.accepted:
            raise _WireError(
                ERROR_MUTATION_REJECTED,
                outcome.reject_message or "operation rejected",
                {
                    "code": outcome.reject_code,
                    "diagnostics": [encode_diagnostic(d) for d in outcome.diagnostics],
                },
            )
        return {
            "accepted": True,
            "revision": outcome.revision,
            "diagnostics": [encode_diagnostic(d) for d in outcome.diagnostics],
        }

    def _switch_view(self, params: dict) -> dict:
        uri = _field(params, "uri")
        clicked = params.get("clickedElementId")
        if clicked is not None:
            current = _field(params, "viewId")
            graph = self.hub.render_view(uri, current)
            target = self._drill_target(graph, clicked)
        else:
            target = _field(params, "viewId")
        return encode_graph(self.hub.switch_view(self.session, uri, target))

    def _drill_target(self, graph: GGraph, clicked: str) -> str:
        for node in walk_nodes(graph):
            if node.id == clicked:
                if node.drill_target is None:
                    raise NotDrillable(f"element {clicked!r} has no drill-down view")
                return node.drill_target
        raise NotDrillable(f"no such element in this view: {clicked!r}")


class _WireError(Exception):
    def __init__(self, code: int, text: str, data: Any = None) -> None:
        super().__init__(text)
        self.code = code
        self.data = data


def _field(params: Any, name: str) -> Any:
    if not isinstance(params, dict) or name not in params:
        raise _WireError(ERROR_INVALID_PARAMS, f"missing field: {name}")
    return params[name]
