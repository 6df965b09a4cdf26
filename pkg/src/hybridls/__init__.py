"""Hybrid language server for the RT-lite statechart DSL.

RT-lite models protocols, capsules with ports, parts and connectors, and
hierarchical state machines.  This package keeps one abstract model per open
document and lets textual clients (LSP) and graphical clients (a JSON-RPC
graph protocol over WebSocket) edit that model concurrently: text edits are
reparsed, graphical operations are translated into minimal text edits, and
every connected view is re-rendered from the updated model.
"""

from __future__ import annotations

__version__ = "0.1.0"
