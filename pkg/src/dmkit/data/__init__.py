"""Bundled example data: a small cardiology knowledge base and case."""

from importlib import resources


def kb_path() -> str:
    """Filesystem path of the bundled cardiomyopathy knowledge base."""
    return str(resources.files(__package__) / "cardiomyopathy.kb")


def case_path() -> str:
    """Filesystem path of the bundled case description."""
    return str(resources.files(__package__) / "cardiomyopathy-case.txt")


def kb_text() -> str:
    return (resources.files(__package__) / "cardiomyopathy.kb").read_text()


def case_text() -> str:
    return (resources.files(__package__) / "cardiomyopathy-case.txt").read_text()
