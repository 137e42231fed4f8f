"""Shipped example scenarios."""

from importlib import resources
from pathlib import Path


def maritime_path() -> Path:
    """Filesystem path of the maritime collision fixture."""
    return Path(resources.files(__package__) / "maritime.resp")
