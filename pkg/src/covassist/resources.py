"""Locates data files shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a shipped fixture (kb, gazetteer, corpus, ...)."""
    path = Path(str(resources.files("covassist").joinpath("fixtures", name)))
    if not path.exists():
        raise FileNotFoundError(f"packaged fixture not found: {name}")
    return path
