"""Command line entry point.

Subcommands: ``check`` (batch diagnostics), ``fmt`` (canonical formatting),
``render`` (headless view rendering), ``views`` (list view ids) and
``serve`` (host both endpoints).  Exit codes: 0 success, 1 diagnostics or
other domain failure, 2 usage or environment failure, 3 formatting
difference in ``fmt --check``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import threading
from pathlib import Path

from . import __version__
from .errors import HybridlsError
from .hub import ModelHub, analyze
from .layout import layout
from .lsp import LineIndex, serve_stream
from .svg import render_svg
from .views import list_views, parse_view_id, render

log = logging.getLogger("hybridls")

DEFAULT_TEXT_PORT = 7071
DEFAULT_GRAPH_PORT = 7072


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("HYBRIDLS_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(name)s %(levelname)s %(message)s"
    )


def _read_file(path: str) -> str | None:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{path}: {exc.strerror or exc}", file=sys.stderr)
        return None


def _print_diagnostics(path: str, text: str, diagnostics, stream=None) -> None:
    index = LineIndex(text)
    for diag in diagnostics:
        pos = index.position(diag.span.start)
        line, col = pos["line"] + 1, pos["character"] + 1
        print(
            f"{path}:{line}:{col}: {diag.code} {diag.message}",
            file=stream or sys.stdout,
        )


def cmd_check(args: argparse.Namespace) -> int:
    saw_errors = False
    for path in args.files:
        text = _read_file(path)
        if text is None:
            return 2
        _model, _spans, _refs, diagnostics = analyze(text)
        _print_diagnostics(path, text, diagnostics)
        if any(d.severity == "error" for d in diagnostics):
            saw_errors = True
    return 1 if saw_errors else 0


def cmd_fmt(args: argparse.Namespace) -> int:
    from .printer import format_text

    differs = False
    for path in args.files:
        text = _read_file(path)
        if text is None:
            return 2
        formatted, diagnostics = format_text(text)
        if formatted is None:
            _print_diagnostics(path, text, diagnostics, stream=sys.stderr)
            return 1
        if args.check:
            if formatted != text:
                print(f"would reformat {path}")
                differs = True
        elif args.write:
            if formatted != text:
                Path(path).write_text(formatted, encoding="utf-8")
        else:
            sys.stdout.write(formatted)
    return 3 if differs else 0


def cmd_views(args: argparse.Namespace) -> int:
    text = _read_file(args.file)
    if text is None:
        return 2
    model, _spans, _refs, diagnostics = analyze(text)
    if model is None:
        _print_diagnostics(args.file, text, diagnostics, stream=sys.stderr)
        return 1
    for view in list_views(model):
        print(view.view_id)
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    text = _read_file(args.file)
    if text is None:
        return 2
    model, _spans, _refs, diagnostics = analyze(text)
    if model is None:
        _print_diagnostics(args.file, text, diagnostics, stream=sys.stderr)
        return 1
    available = [view.view_id for view in list_views(model)]
    if args.view not in available:
        print(f"unknown view: {args.view}", file=sys.stderr)
        print("available views:", file=sys.stderr)
        for view_id in available:
            print(f"  {view_id}", file=sys.stderr)
        return 1
    try:
        parse_view_id(args.view)
        graph = layout(render(model, args.view, max_depth=args.depth))
    except HybridlsError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    document = render_svg(graph)
    if args.out:
        try:
            Path(args.out).write_text(document, encoding="utf-8")
        except OSError as exc:
            print(f"{args.out}: {exc.strerror or exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(document)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import start_graph_ws, start_text_tcp

    hub = ModelHub()
    client_dir = Path(args.client_dir) if args.client_dir else None
    if client_dir is not None and not client_dir.is_dir():
        print(f"client directory not found: {client_dir}", file=sys.stderr)
        return 2
    try:
        graph_server = start_graph_ws(hub, args.host, args.graph_port, client_dir)
    except OSError as exc:
        print(f"cannot bind graph port {args.graph_port}: {exc}", file=sys.stderr)
        return 2
    log.info("graph endpoint on ws://%s:%d%s", args.host, args.graph_port, "/graph")
    try:
        if args.stdio:
            serve_stream(hub, sys.stdin.buffer, sys.stdout.buffer)
        else:
            try:
                text_server = start_text_tcp(hub, args.host, args.text_port)
            except OSError as exc:
                print(f"cannot bind text port {args.text_port}: {exc}", file=sys.stderr)
                return 2
            log.info("text endpoint on %s:%d", args.host, args.text_port)
            try:
                threading.Event().wait()
            finally:
                text_server.shutdown()
    except KeyboardInterrupt:
        pass
    finally:
        graph_server.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridls",
        description="Hybrid textual/graphical language server for RT-lite models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse and validate files")
    check.add_argument("files", nargs="+")
    check.set_defaults(fn=cmd_check)

    fmt = sub.add_parser("fmt", help="canonical formatting")
    fmt.add_argument("files", nargs="+")
    mode = fmt.add_mutually_exclusive_group()
    mode.add_argument("--write", action="store_true", help="rewrite files in place")
    mode.add_argument(
        "--check", action="store_true", help="exit 3 if any file is not canonical"
    )
    fmt.set_defaults(fn=cmd_fmt)

    views = sub.add_parser("views", help="list the views of a model")
    views.add_argument("file")
    views.set_defaults(fn=cmd_views)

    rend = sub.add_parser("render", help="render one view to a vector image")
    rend.add_argument("file")
    rend.add_argument("--view", default="root", help="view id (default: root)")
    rend.add_argument("--out", help="output path (default: stdout)")
    rend.add_argument(
        "--depth", type=int, default=8, help="unfolding depth for analysis views"
    )
    rend.set_defaults(fn=cmd_render)

    serve = sub.add_parser("serve", help="host the textual and graphical endpoints")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--text-port", type=int, default=DEFAULT_TEXT_PORT)
    serve.add_argument("--graph-port", type=int, default=DEFAULT_GRAPH_PORT)
    serve.add_argument(
        "--stdio", action="store_true", help="textual endpoint on stdio instead of TCP"
    )
    serve.add_argument("--client-dir", help="serve static client files from this directory")
    serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
