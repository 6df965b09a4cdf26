#!/usr/bin/env python3
"""Regenerate the browser client's graph fixtures.

The JSON under frontend/tests/fixtures mirrors what the graph endpoint
sends for a handful of views, so the DOM tests exercise real rendering
output without running a server.  Rendering is deterministic, so the
committed fixtures can be rebuilt byte-identically at any time.

Usage: python3 scripts/gen_frontend_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from hybridls.glsp import encode_graph
from hybridls.hub import ModelHub
from hybridls.layout import layout
from hybridls.parser import parse
from hybridls.views import reach_tree

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "frontend" / "tests" / "fixtures"
URI = "file:///fixtures/sample.rt"


def from_hub(text: str, view_id: str) -> dict:
    hub = ModelHub()
    hub.open(URI, text)
    return encode_graph(hub.render_view(URI, view_id))


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    ping_pong = (REPO / "corpus" / "clean" / "ping-pong.rt").read_text()
    fixtures = {
        "behavior.json": from_hub(ping_pong, "behavior:M.Controller"),
        "structure.json": from_hub(ping_pong, "structure:M.Controller"),
        "empty-root.json": from_hub("model Empty {\n}\n", "root"),
    }
    model = parse(ping_pong).model
    assert model is not None
    # depth 3 is the smallest unfolding where a state label repeats
    fixtures["reach-depth3.json"] = encode_graph(
        layout(reach_tree(model, "M.Controller", max_depth=3))
    )
    for name, graph in fixtures.items():
        path = FIXTURES / name
        path.write_text(json.dumps(graph, indent=2) + "\n")
        print(f"wrote {path.relative_to(REPO)}")


if __name__ == "__main__":
    main()
