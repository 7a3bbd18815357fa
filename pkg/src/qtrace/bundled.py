"""Access to the machine and program fixtures shipped with the package."""

from __future__ import annotations

from importlib import resources

from .modeljson import parse_model


def fixture_text(name: str) -> str:
    """Raw contents of a shipped fixture file."""
    return resources.files("qtrace.fixtures").joinpath(name).read_text()


def load_model(name: str):
    """Parse a shipped JSON model fixture."""
    return parse_model(fixture_text(name))


def fixture_path(name: str) -> str:
    """Filesystem path of a shipped fixture (fixtures are plain files)."""
    return str(resources.files("qtrace.fixtures").joinpath(name))
