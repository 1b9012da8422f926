"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A single load-time problem, anchored to a 1-based line number."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class UnknownConceptError(EngineError):
    """An operation referenced a concept id that is not declared."""


class UnknownPropertyError(EngineError):
    """A property is not applicable to a concept or any of its ancestors."""


class CycleError(EngineError):
    """A categorizer closure violated irreflexivity or asymmetry."""

    def __init__(self, kind: str, members: tuple[str, ...]) -> None:
        self.kind = kind
        self.members = tuple(sorted(members))
        super().__init__(f"{kind} hierarchy contains a cycle through: " + ", ".join(self.members))


class LoadError(EngineError):
    """A text artifact failed to load; carries every diagnostic found."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = sorted(diagnostics, key=lambda d: (d.line, d.message))
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class KbLoadError(LoadError):
    """A knowledge-base file failed to parse or validate."""


class CaseLoadError(LoadError):
    """A case-description file failed to parse or validate."""


class EmptyContextError(EngineError):
    """No suspected disease and no condition: a domain context cannot be set."""


class ModelError(EngineError):
    """Base class for decision-model construction and evaluation errors."""


class CyclicModelError(ModelError):
    """The model graph contains a directed cycle."""

    def __init__(self, members: tuple[str, ...]) -> None:
        self.members = tuple(sorted(members))
        super().__init__("model graph contains a cycle through: " + ", ".join(self.members))


class NoDecisionNodeError(ModelError):
    """The formulation yields no decision node."""


class NoValueNodeError(ModelError):
    """The formulation yields no value node."""


class QpnParseError(LoadError, ModelError):
    """A model file failed to parse or validate."""
