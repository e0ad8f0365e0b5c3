"""Shared fixtures: bundled data paths and the reference host method."""

from __future__ import annotations

from pathlib import Path

import pytest

from carve.method_model import parse_method

DATA_DIR = Path(__file__).parent / "data"
REFERENCE_DIR = DATA_DIR / "reference"
CORPUS_DIR = DATA_DIR / "corpus"
GOLDEN_DIR = DATA_DIR / "golden"

REFERENCE_SOURCE = REFERENCE_DIR / "sources" / "PropertyAccess.java"
REFERENCE_RANGE = (150, 166)


@pytest.fixture(scope="session")
def reference_source() -> str:
    return REFERENCE_SOURCE.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def reference_method(reference_source):
    return parse_method(reference_source, REFERENCE_RANGE, REFERENCE_SOURCE)
