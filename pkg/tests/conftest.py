from __future__ import annotations

from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"
CLEAN = sorted((CORPUS / "clean").glob("*.rt"))
DIAG = sorted((CORPUS / "diag").glob("*.rt"))


@pytest.fixture(scope="session")
def ping_pong_text() -> str:
    return (CORPUS / "clean" / "ping-pong.rt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def ping_pong_model(ping_pong_text):
    from hybridls.parser import parse

    result = parse(ping_pong_text)
    assert result.model is not None
    return result.model


def clean_corpus() -> list[Path]:
    assert CLEAN, "clean corpus missing"
    return CLEAN


def diag_corpus() -> list[Path]:
    assert DIAG, "diagnostic corpus missing"
    return DIAG
