"""Closed-world query answering with justification traces.

Four query shapes are supported, all relative to an active context:

* :func:`is_related` -- is ``(a, b)`` in the closure of a categorizer?
* :func:`related_concepts` -- every concept related to ``a`` by a
  categorizer, walking ``up`` (generalizations) or ``down``
  (specializations).
* :func:`interaction_neighbors` -- every concept interacting with ``a``
  by a given interaction kind, in either direction.
* :func:`interacts` -- does ``a`` interact with ``b`` by a given kind?

Anything not derivable from visible assertions is false or absent, and a
positive answer always cites the assertions it rests on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .interactions import InteractionKind, interaction_views
from .kb import (
    CategorizerKind,
    Context,
    KnowledgeBase,
    TraceEntry,
    categorizer_closure,
)


@dataclass(frozen=True)
class QueryAnswer:
    """The verdict or member set of a query, plus its supporting trace.

    ``verdict`` is set for yes/no queries and ``None`` for set queries;
    ``members`` is the reverse. A yes verdict and each member carry at
    least one trace entry; a no verdict has none.
    """

    verdict: bool | None
    members: frozenset[str] | None
    trace: tuple[TraceEntry, ...]

    def render(self) -> list[str]:
        lines: list[str] = []
        if self.verdict is not None:
            lines.append("yes" if self.verdict else "no")
        else:
            assert self.members is not None
            lines.extend(sorted(self.members) if self.members else ["(none)"])
        lines.extend(f"  {entry.render()}" for entry in sorted(self.trace, key=lambda e: e.render()))
        return lines


def is_related(
    kb: KnowledgeBase, active: Context, a: str, b: str, kind: CategorizerKind
) -> QueryAnswer:
    """Is ``a`` related to ``b`` by ``kind`` under ``active``?"""
    kb.require(a, b)
    closure = categorizer_closure(kb, kind, active)
    if (a, b) in closure:
        return QueryAnswer(True, None, tuple(closure.explain(a, b)))
    return QueryAnswer(False, None, ())


def related_concepts(
    kb: KnowledgeBase,
    active: Context,
    a: str,
    kind: CategorizerKind,
    direction: str = "down",
) -> QueryAnswer:
    """Concepts related to ``a`` by ``kind``: its generalizations
    (``up``) or its specializations (``down``)."""
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', not {direction!r}")
    kb.require(a)
    closure = categorizer_closure(kb, kind, active)
    entries: list[TraceEntry] = []
    if direction == "up":
        members = closure.successors(a)
        for member in sorted(members):
            entries.extend(TraceEntry(e.tag, e.assertion, member) for e in closure.explain(a, member))
    else:
        members = closure.predecessors(a)
        for member in sorted(members):
            entries.extend(TraceEntry(e.tag, e.assertion, member) for e in closure.explain(member, a))
    return QueryAnswer(None, frozenset(members), tuple(entries))


def interaction_neighbors(
    kb: KnowledgeBase, active: Context, a: str, kind: InteractionKind
) -> QueryAnswer:
    """Concepts interacting with ``a`` by ``kind`` in either direction."""
    members: set[str] = set()
    entries: list[TraceEntry] = []
    for view in interaction_views(kb, a, active):
        if view.assertion.kind is not kind:
            continue
        neighbor = view.assertion.target if view.assertion.source == a else view.assertion.source
        members.add(neighbor)
        entries.append(TraceEntry(view.how, view.origin, neighbor))
    return QueryAnswer(None, frozenset(members), tuple(entries))


def interacts(
    kb: KnowledgeBase, active: Context, a: str, b: str, kind: InteractionKind
) -> QueryAnswer:
    """Does ``a`` interact with ``b`` by ``kind`` (directed)?"""
    kb.require(b)
    entries: list[TraceEntry] = []
    for view in interaction_views(kb, a, active):
        if view.assertion.kind is kind and view.assertion.source == a and view.assertion.target == b:
            entries.append(TraceEntry(view.how, view.origin))
    if entries:
        return QueryAnswer(True, None, tuple(entries))
    return QueryAnswer(False, None, ())
