from __future__ import annotations

import sys
from pathlib import Path

import pytest

from sheetlens.workbook import Workbook, load_grid, load_json

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_fixture(name: str) -> Workbook:
    text = fixture_text(name)
    return load_json(text) if name.endswith(".json") else load_grid(text)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
