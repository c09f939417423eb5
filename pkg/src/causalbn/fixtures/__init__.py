"""Bundled fixtures: reference structures, default bins, an elicitation
context, and canned LLM responses for the replay transport."""

from importlib.resources import files
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture file."""
    return Path(str(files(__package__).joinpath(name)))


def fixture_text(name: str) -> str:
    return files(__package__).joinpath(name).read_text(encoding="utf-8")
