"""Bundled fixture data."""

from __future__ import annotations

from pathlib import Path

MINI_DIR = Path(__file__).parent / "mini"
MINI_EXAMPLES = MINI_DIR / "examples.json"
MINI_SCHEMAS = MINI_DIR / "schemas.json"
MINI_DATABASES = MINI_DIR / "databases"


def load_mini_corpus():
    """The bundled 12-query mini corpus (three small databases, CSV-backed)."""
    from ..corpus import load_corpus

    return load_corpus(MINI_EXAMPLES, MINI_SCHEMAS, MINI_DATABASES)
