"""Regenerate the checked-in protocol transcript.

Replays the scripted dual-endpoint session from tests/harness.py against a
live server and writes the resulting transcript.  Run after any deliberate
protocol or layout change, then review the diff.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from harness import run_scenario  # noqa: E402


def main() -> None:
    base_text = (REPO / "corpus" / "clean" / "ping-pong.rt").read_text(encoding="utf-8")
    transcript = run_scenario(base_text)
    out = REPO / "tests" / "golden" / "dual-protocol.log"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(transcript, encoding="utf-8")
    print(f"wrote {out} ({len(transcript.splitlines())} lines)")


if __name__ == "__main__":
    main()
