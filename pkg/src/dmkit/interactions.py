"""Uncertain knowledge: signed, possibly context-scoped interactions.

An interaction links a source concept to a target concept and carries two
independent components: the direction of qualitative influence (positive,
negative or unknown) and whether temporal precedence of the source is
known. The combination classifies the link::

    precedence   influence   kind
    unknown      unknown     association
    known        unknown     precedence
    unknown      positive    positive-influence
    unknown      negative    negative-influence
    known        positive    cause
    known        negative    inhibit

A significance in ``[0, 1]`` (default 0.5) orders interactions of equal
context specificity; it is ordinal only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .kb import (
    UNIVERSAL,
    CategorizerKind,
    Context,
    KnowledgeBase,
    categorizer_closure,
    context_visible,
    eqv_members,
)


class InfluenceSign(Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    UNKNOWN = "?"


class Precedence(Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"


class InteractionKind(Enum):
    ASSOCIATION = "association"
    PRECEDENCE = "precedence"
    POSITIVE_INFLUENCE = "positive-influence"
    NEGATIVE_INFLUENCE = "negative-influence"
    CAUSE = "cause"
    INHIBIT = "inhibit"


_KIND_TABLE: dict[tuple[Precedence, InfluenceSign], InteractionKind] = {
    (Precedence.UNKNOWN, InfluenceSign.UNKNOWN): InteractionKind.ASSOCIATION,
    (Precedence.KNOWN, InfluenceSign.UNKNOWN): InteractionKind.PRECEDENCE,
    (Precedence.UNKNOWN, InfluenceSign.POSITIVE): InteractionKind.POSITIVE_INFLUENCE,
    (Precedence.UNKNOWN, InfluenceSign.NEGATIVE): InteractionKind.NEGATIVE_INFLUENCE,
    (Precedence.KNOWN, InfluenceSign.POSITIVE): InteractionKind.CAUSE,
    (Precedence.KNOWN, InfluenceSign.NEGATIVE): InteractionKind.INHIBIT,
}


def classify_kind(prec: Precedence, sign: InfluenceSign) -> InteractionKind:
    """Map the two link components to the interaction kind (a bijection)."""
    return _KIND_TABLE[(prec, sign)]


@dataclass(frozen=True)
class InteractionAssertion:
    """A directed interaction between two distinct concepts."""

    source: str
    target: str
    sign: InfluenceSign
    prec: Precedence
    context: Context = UNIVERSAL
    significance: float = 0.5

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"interaction source and target coincide: {self.source!r}")
        if not 0.0 <= self.significance <= 1.0:
            raise ValueError(f"significance out of range: {self.significance!r}")

    @property
    def kind(self) -> InteractionKind:
        return classify_kind(self.prec, self.sign)

    def render(self) -> str:
        line = (
            f"link {self.source} -> {self.target}"
            f" sign={self.sign.value} prec={self.prec.value} sig={self.significance!r}"
        )
        if not self.context.is_universal:
            line += f" @ {self.context.name}"
        return line


def ranking_key(assertion: InteractionAssertion) -> tuple:
    """Sort key for interaction lists: more specific context first, then
    higher significance, then source, target, kind and context name."""
    return (
        -len(assertion.context.conditions),
        -assertion.significance,
        assertion.source,
        assertion.target,
        assertion.kind.value,
        assertion.context.name,
    )


@dataclass(frozen=True)
class InteractionView:
    """An interaction as seen from a subject concept.

    ``assertion`` has the matching endpoint re-pointed at the subject when
    the match was through an ancestor or an equivalent concept; ``origin``
    is the assertion exactly as stored. ``how`` is ``direct``,
    ``inherited`` or ``eqv-substituted``.
    """

    assertion: InteractionAssertion
    origin: InteractionAssertion
    how: str


def interaction_views(kb: KnowledgeBase, cid: str, active: Context) -> list[InteractionView]:
    """Every interaction applicable to ``cid`` under ``active``.

    A concept sees its own interactions, those of its specialization
    ancestors (re-pointed at itself, keeping the original context and
    significance) and those of equivalent concepts. The list is ordered by
    :func:`ranking_key` and re-pointed duplicates are dropped.
    """
    kb.require(cid)
    kb.require_context(active)
    ancestors = categorizer_closure(kb, CategorizerKind.AKO, active).successors(cid)
    equivalents = eqv_members(kb, cid, active) - {cid}

    views: list[InteractionView] = []
    for assertion in kb.interactions:
        if not context_visible(assertion.context, active, kb):
            continue
        if cid in (assertion.source, assertion.target):
            views.append(InteractionView(assertion, assertion, "direct"))
            continue
        source_how = _match(assertion.source, ancestors, equivalents)
        target_how = _match(assertion.target, ancestors, equivalents)
        if source_how and target_how:
            # Re-pointing both endpoints would collapse the interaction
            # into a self-loop; such an assertion says nothing about cid.
            continue
        if source_how:
            views.append(InteractionView(replace(assertion, source=cid), assertion, source_how))
        elif target_how:
            views.append(InteractionView(replace(assertion, target=cid), assertion, target_how))

    views.sort(key=lambda view: ranking_key(view.assertion))
    unique: dict[InteractionAssertion, InteractionView] = {}
    for view in views:
        unique.setdefault(view.assertion, view)
    return list(unique.values())


def _match(endpoint: str, ancestors: set[str], equivalents: set[str]) -> str | None:
    if endpoint in ancestors:
        return "inherited"
    if endpoint in equivalents:
        return "eqv-substituted"
    return None


def visible_interactions(kb: KnowledgeBase, cid: str, active: Context) -> list[InteractionAssertion]:
    """The ranked interaction assertions applicable to ``cid``; inherited
    assertions are re-pointed at ``cid``."""
    return [view.assertion for view in interaction_views(kb, cid, active)]
