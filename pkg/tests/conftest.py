from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


@pytest.fixture
def corpus() -> Path:
    return CORPUS


def read(rel: str) -> str:
    return (CORPUS / rel).read_text(encoding="utf-8")
