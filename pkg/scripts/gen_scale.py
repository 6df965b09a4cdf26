#!/usr/bin/env python3
"""Generate the large corpus model deterministically.

The output is a chain of capsules connected through alternating-conjugation
ports, each with an eight-state cyclic machine.  Element count lands a bit
above 500; the exact text depends only on the constants below, so the
committed file can be regenerated byte-identically at any time.

Usage: python3 scripts/gen_scale.py [--out corpus/clean/scale-500.rt]
"""

from __future__ import annotations

import argparse
from pathlib import Path

PROTOCOLS = 8
CAPSULES = 23
STATES = 8


def build() -> str:
    blocks: list[str] = []
    for p in range(PROTOCOLS):
        blocks.append(
            f"protocol P{p} {{\n"
            f"  in msg req{p};\n"
            f"  out msg rsp{p};\n"
            f"}}"
        )
    for c in range(CAPSULES):
        lines = [f"capsule C{c} {{"]
        lines.append(f"  port up : ~P{c % PROTOCOLS};")
        last = c == CAPSULES - 1
        if not last:
            lines.append(f"  port down : P{(c + 1) % PROTOCOLS};")
            lines.append(f"  part w : C{c + 1};")
            lines.append("  connect down to w.up;")
        lines.append("  statemachine {")
        lines.append("    initial -> St0;")
        for s in range(STATES):
            lines.append(f"    state St{s};")
        for s in range(STATES):
            nxt = (s + 1) % STATES
            lines.append(f"    St{s} -> St{nxt} on up.req{c % PROTOCOLS};")
        lines.append("  }")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "model Scale {\n" + "\n\n".join(blocks) + "\n}\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parent.parent / "corpus/clean/scale-500.rt"),
    )
    args = parser.parse_args()
    Path(args.out).write_text(build(), encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
