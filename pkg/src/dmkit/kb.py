"""Categorical and contextual knowledge: concepts, categorizers, contexts.

The knowledge base stores concept declarations (each concept may name
properties and enumerate their values), categorical assertions relating
concepts by specialization (``ako``), decomposition (``partof``) or
equivalence (``eqv``), and interaction assertions (see
:mod:`dmkit.interactions`). Any assertion may be scoped to a *context*, a
set of condition concepts; the empty context is universal.

Every read operation answers relative to an *active* context. An assertion
is visible when each of its conditions either belongs to the active
conditions or generalizes one of them along the specialization hierarchy,
so knowledge stated for a general situation applies in every more specific
one.

Closures over the categorical assertions are computed per active context
and carry provenance, so query answers can cite the exact assertions that
support them. Specialization additionally lifts to derived concepts: when
``a`` specializes ``b`` and both ``p-of-a`` and ``p-of-b`` exist, the
former specializes the latter.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import CycleError, UnknownConceptError, UnknownPropertyError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .interactions import InteractionAssertion

log = logging.getLogger(__name__)

PRESENCE = "presence"
PRESENT = "present"
ABSENT = "absent"

#: Concepts that exist in every knowledge base. ``presence`` is a property
#: applicable to any concept and defaults to the values below.
BUILTIN_CONCEPTS = (PRESENCE, PRESENT, ABSENT)

DERIVED_SEP = "-of-"

_ID_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


def is_valid_id(text: str) -> bool:
    """Return whether ``text`` is already a canonical concept id."""
    return bool(_ID_RE.fullmatch(text))


def normalize_id(text: str) -> str:
    """Canonicalize a concept id: lowercase, whitespace runs become hyphens.

    Raises ``ValueError`` if the result is not a well-formed id (ids are
    non-empty runs of lowercase letters and digits separated by single
    hyphens, with no leading or trailing hyphen).
    """
    candidate = re.sub(r"\s+", "-", text.strip().lower())
    if not is_valid_id(candidate):
        raise ValueError(f"invalid concept id: {text!r}")
    return candidate


class CategorizerKind(Enum):
    """The three categorical relations between concepts."""

    AKO = "ako"
    PARTOF = "partof"
    EQV = "eqv"


@dataclass(frozen=True)
class Context:
    """A set of condition concepts under which an assertion holds.

    The empty set is the universal context: such assertions hold
    everywhere. Contexts compose by set union and order naturally by
    specificity (more conditions = more specific).
    """

    conditions: frozenset[str] = frozenset()

    @classmethod
    def of(cls, *ids: str) -> "Context":
        return cls(frozenset(ids))

    @classmethod
    def parse(cls, text: str) -> "Context":
        """Parse ``c1+c2+...``; blank or ``universal`` means universal."""
        text = text.strip()
        if not text or text == "universal":
            return UNIVERSAL
        return cls(frozenset(normalize_id(part) for part in text.split("+")))

    @property
    def is_universal(self) -> bool:
        return not self.conditions

    @property
    def name(self) -> str:
        if self.is_universal:
            return "universal"
        return "+".join(sorted(self.conditions))

    def __le__(self, other: "Context") -> bool:
        return self.conditions <= other.conditions

    def __str__(self) -> str:
        return self.name


UNIVERSAL = Context()


@dataclass(frozen=True)
class Concept:
    """A node of the ontology.

    ``derived_from`` is ``None`` for base concepts; for derived concepts it
    holds ``(property, of)`` and the id is ``<property>-of-<of>`` exactly.
    The ``of`` link doubles as the contextual parent of the derived
    concept. ``properties`` lists the property concepts declared directly
    on this concept; properties of ancestors apply by inheritance.
    """

    id: str
    derived_from: tuple[str, str] | None = None
    properties: frozenset[str] = frozenset()

    @property
    def is_derived(self) -> bool:
        return self.derived_from is not None


@dataclass(frozen=True)
class CategoricalAssertion:
    """One ``ako``/``partof``/``eqv`` fact, possibly context-scoped."""

    kind: CategorizerKind
    a: str
    b: str
    context: Context = UNIVERSAL

    def render(self) -> str:
        line = f"{self.kind.value} {self.a} {self.b}"
        if not self.context.is_universal:
            line += f" @ {self.context.name}"
        return line


@dataclass(frozen=True)
class TraceEntry:
    """One assertion cited in support of a query answer.

    ``tag`` says how the assertion was used: ``direct``, ``inherited``,
    ``transitive``, ``lifted`` or ``eqv-substituted``. For queries that
    return a set, ``member`` names the result element the entry supports.
    """

    tag: str
    assertion: object
    member: str | None = None

    def render(self) -> str:
        text = f"[{self.tag}] {self.assertion.render()}"
        if self.member is not None:
            text = f"{self.member}: {text}"
        return text


class KnowledgeBase:
    """An in-memory store of concepts and assertions.

    Instances are immutable once loaded, with one exception: deriving a new
    concept registers it (see :func:`derive_concept`). Derivation is a
    construction-time operation; do not run it concurrently with readers.
    Plain reads are side-effect-free apart from memoized closures and are
    safe to share.
    """

    def __init__(
        self,
        concepts: dict[str, Concept],
        assignments: dict[tuple[str, str], tuple[str, ...]],
        categorical: Iterable[CategoricalAssertion],
        interactions: Iterable["InteractionAssertion"],
    ) -> None:
        self.concepts: dict[str, Concept] = dict(concepts)
        for cid in BUILTIN_CONCEPTS:
            self.concepts.setdefault(cid, Concept(cid))
        self.assignments: dict[tuple[str, str], tuple[str, ...]] = dict(assignments)
        self.categorical: tuple[CategoricalAssertion, ...] = tuple(categorical)
        self.interactions: tuple["InteractionAssertion", ...] = tuple(interactions)
        self._closure_cache: dict[tuple[CategorizerKind, frozenset[str]], ClosureRelation] = {}
        # Derived concepts indexed by their base, for specialization lifts.
        self._derived_by_base: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for concept in self.concepts.values():
            self._index_derived(concept)

    def _index_derived(self, concept: Concept) -> None:
        if concept.derived_from is not None:
            prop, of = concept.derived_from
            self._derived_by_base[of].append((prop, concept.id))

    # -- lookups ---------------------------------------------------------

    def has(self, cid: str) -> bool:
        return cid in self.concepts

    def concept(self, cid: str) -> Concept:
        try:
            return self.concepts[cid]
        except KeyError:
            raise UnknownConceptError(f"unknown concept: {cid!r}") from None

    def require(self, *cids: str) -> None:
        for cid in cids:
            self.concept(cid)

    def require_context(self, ctx: Context) -> None:
        self.require(*ctx.conditions)

    def categorical_of(self, kind: CategorizerKind) -> Iterator[CategoricalAssertion]:
        return (a for a in self.categorical if a.kind is kind)

    def derived_id(self, prop: str, of: str) -> str | None:
        """Return the id of the registered derived concept, if any."""
        cid = f"{prop}{DERIVED_SEP}{of}"
        concept = self.concepts.get(cid)
        if concept is not None and concept.derived_from == (prop, of):
            return cid
        return None

    @property
    def contexts(self) -> list[Context]:
        """Every distinct context appearing on an assertion, sorted."""
        seen = {a.context for a in self.categorical}
        seen.update(a.context for a in self.interactions)
        return sorted(seen, key=lambda c: c.name)

    # -- registration (construction phase only) --------------------------

    def _register(self, concept: Concept) -> None:
        self.concepts[concept.id] = concept
        self._index_derived(concept)
        self._closure_cache.clear()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.assignments == other.assignments
            and sorted(self.categorical, key=repr) == sorted(other.categorical, key=repr)
            and sorted(self.interactions, key=repr) == sorted(other.interactions, key=repr)
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# Equivalence classes
# ---------------------------------------------------------------------------


class _EqvForest:
    """Connected components of the visible ``eqv`` assertions.

    Keeps the assertion labelling each edge so a justification path
    between any two equivalent concepts can be reconstructed.
    """

    def __init__(self, assertions: Iterable[CategoricalAssertion]) -> None:
        self._adj: dict[str, list[tuple[str, CategoricalAssertion]]] = defaultdict(list)
        for assertion in assertions:
            self._adj[assertion.a].append((assertion.b, assertion))
            self._adj[assertion.b].append((assertion.a, assertion))

    def participants(self) -> list[str]:
        return sorted(self._adj)

    def members(self, cid: str) -> set[str]:
        """The equivalence class of ``cid`` (singleton when unasserted)."""
        seen = {cid}
        queue = deque([cid])
        while queue:
            current = queue.popleft()
            for neighbor, _ in self._adj.get(current, ()):
                if neighbor not in seen:
                    seen.add(neighbor)
                    queue.append(neighbor)
        return seen

    def witness(self, cid: str) -> CategoricalAssertion | None:
        edges = self._adj.get(cid)
        return edges[0][1] if edges else None

    def path_assertions(self, start: str, goal: str) -> list[CategoricalAssertion]:
        """Assertions along one path linking ``start`` to ``goal``."""
        if start == goal:
            return []
        parents: dict[str, tuple[str, CategoricalAssertion]] = {start: (start, None)}  # type: ignore[dict-item]
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for neighbor, assertion in self._adj.get(current, ()):
                if neighbor in parents:
                    continue
                parents[neighbor] = (current, assertion)
                if neighbor == goal:
                    path = []
                    node = goal
                    while node != start:
                        node, edge = parents[node]
                        path.append(edge)
                    path.reverse()
                    return path
                queue.append(neighbor)
        raise KeyError(f"{start!r} and {goal!r} are not equivalent")


# ---------------------------------------------------------------------------
# Context visibility
# ---------------------------------------------------------------------------


def context_visible(assertion_ctx: Context, active: Context, kb: KnowledgeBase) -> bool:
    """Is an assertion scoped to ``assertion_ctx`` applicable under ``active``?

    True iff every condition of the assertion context is either an active
    condition or generalizes one (is a specialization ancestor of an active
    condition, judged against universally visible assertions). Universal
    assertions are visible everywhere; enlarging the active context never
    hides an assertion that was visible.
    """
    kb.require_context(assertion_ctx)
    kb.require_context(active)
    if assertion_ctx.is_universal:
        return True
    if active.is_universal:
        return False
    closure = categorizer_closure(kb, CategorizerKind.AKO, UNIVERSAL)
    for condition in assertion_ctx.conditions:
        if condition in active.conditions:
            continue
        if any((member, condition) in closure for member in active.conditions):
            continue
        return False
    return True


# ---------------------------------------------------------------------------
# Closures
# ---------------------------------------------------------------------------

_ASSERTED = "asserted"
_TRANS = "trans"
_LIFT = "lift"
_EQV_SUBST = "eqv"
_REFL = "refl"


class ClosureRelation:
    """A binary relation over concept ids, with per-pair provenance."""

    def __init__(self, kind: CategorizerKind) -> None:
        self.kind = kind
        self._just: dict[tuple[str, str], tuple] = {}
        self._succ: dict[str, set[str]] = defaultdict(set)
        self._pred: dict[str, set[str]] = defaultdict(set)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._just

    def __len__(self) -> int:
        return len(self._just)

    def pairs(self) -> set[tuple[str, str]]:
        return set(self._just)

    def successors(self, cid: str) -> set[str]:
        return set(self._succ.get(cid, ()))

    def predecessors(self, cid: str) -> set[str]:
        return set(self._pred.get(cid, ()))

    def _add(self, pair: tuple[str, str], justification: tuple) -> bool:
        if pair in self._just:
            return False
        self._just[pair] = justification
        self._succ[pair[0]].add(pair[1])
        self._pred[pair[1]].add(pair[0])
        return True

    def explain(self, a: str, b: str) -> list[TraceEntry]:
        """The assertions supporting ``(a, b)``, each tagged by its role."""
        entries: list[TraceEntry] = []

        def walk(pair: tuple[str, str], tag: str | None) -> None:
            justification = self._just[pair]
            rule = justification[0]
            if rule == _ASSERTED:
                entries.append(TraceEntry(tag or "direct", justification[1]))
            elif rule == _REFL:
                entries.append(TraceEntry(tag or "eqv-substituted", justification[1]))
            elif rule == _TRANS:
                walk(justification[1], tag or "transitive")
                walk(justification[2], tag or "transitive")
            elif rule == _LIFT:
                walk(justification[1], "lifted")
            elif rule == _EQV_SUBST:
                for assertion in justification[2]:
                    entries.append(TraceEntry("eqv-substituted", assertion))
                walk(justification[1], tag or "eqv-substituted")

        walk((a, b), None)
        unique: dict[TraceEntry, None] = dict.fromkeys(entries)
        return list(unique)


def _eqv_forest(kb: KnowledgeBase, active: Context) -> _EqvForest:
    visible = [
        assertion
        for assertion in kb.categorical_of(CategorizerKind.EQV)
        if context_visible(assertion.context, active, kb)
    ]
    return _EqvForest(visible)


def _eqv_relation(kb: KnowledgeBase, active: Context) -> ClosureRelation:
    relation = ClosureRelation(CategorizerKind.EQV)
    forest = _eqv_forest(kb, active)
    for cid in forest.participants():
        relation._add((cid, cid), (_REFL, forest.witness(cid)))
        for member in sorted(forest.members(cid)):
            if member != cid:
                relation._add(
                    (cid, member),
                    (_EQV_SUBST, (cid, cid), tuple(forest.path_assertions(cid, member))),
                )
    return relation


def categorizer_closure(kb: KnowledgeBase, kind: CategorizerKind, active: Context) -> ClosureRelation:
    """The closure of the visible ``kind`` assertions under ``active``.

    Specialization and decomposition close transitively and substitute
    through equivalence classes; specialization additionally lifts to
    derived concepts. Both are validated irreflexive and asymmetric; a
    violation raises :class:`CycleError` naming the concepts involved.
    Equivalence closes reflexively (over concepts taking part in at least
    one visible equivalence), symmetrically and transitively.
    """
    kb.require_context(active)
    cache_key = (kind, active.conditions)
    cached = kb._closure_cache.get(cache_key)
    if cached is not None:
        return cached

    if kind is CategorizerKind.EQV:
        relation = _eqv_relation(kb, active)
        kb._closure_cache[cache_key] = relation
        return relation

    forest = _eqv_forest(kb, active)
    relation = ClosureRelation(kind)
    queue: deque[tuple[str, str]] = deque()

    def add(pair: tuple[str, str], justification: tuple) -> None:
        if relation._add(pair, justification):
            queue.append(pair)

    for assertion in kb.categorical_of(kind):
        if context_visible(assertion.context, active, kb):
            add((assertion.a, assertion.b), (_ASSERTED, assertion))

    lift = kind is CategorizerKind.AKO
    while queue:
        a, b = queue.popleft()
        for c in list(relation._succ.get(b, ())):
            add((a, c), (_TRANS, (a, b), (b, c)))
        for z in list(relation._pred.get(a, ())):
            add((z, b), (_TRANS, (z, a), (a, b)))
        for a2, b2 in itertools.product(sorted(forest.members(a)), sorted(forest.members(b))):
            if (a2, b2) != (a, b):
                path = tuple(forest.path_assertions(a, a2) + forest.path_assertions(b, b2))
                add((a2, b2), (_EQV_SUBST, (a, b), path))
        if lift:
            for prop, derived_a in kb._derived_by_base.get(a, ()):
                derived_b = kb.derived_id(prop, b)
                if derived_b is not None:
                    add((derived_a, derived_b), (_LIFT, (a, b), prop))

    offenders = {a for (a, b) in relation.pairs() if a == b}
    offenders.update(
        itertools.chain.from_iterable(
            (a, b) for (a, b) in relation.pairs() if a != b and (b, a) in relation
        )
    )
    if offenders:
        raise CycleError(kind.value, tuple(offenders))

    kb._closure_cache[cache_key] = relation
    return relation


def ako_closure(kb: KnowledgeBase, active: Context) -> ClosureRelation:
    """Specialization closure visible under ``active``."""
    return categorizer_closure(kb, CategorizerKind.AKO, active)


def eqv_members(kb: KnowledgeBase, cid: str, active: Context) -> set[str]:
    """``cid`` together with every concept equivalent to it under ``active``."""
    return _eqv_forest(kb, active).members(cid)


def ako_children(kb: KnowledgeBase, cid: str, active: Context) -> list[str]:
    """Directly asserted specializations of ``cid`` visible under ``active``."""
    kb.require(cid)
    group = eqv_members(kb, cid, active)
    children = {
        assertion.a
        for assertion in kb.categorical_of(CategorizerKind.AKO)
        if assertion.b in group and context_visible(assertion.context, active, kb)
    }
    return sorted(children - {cid})


# ---------------------------------------------------------------------------
# Derived concepts
# ---------------------------------------------------------------------------


def direct_ancestors(kb: KnowledgeBase, cid: str) -> list[str]:
    """Asserted specialization parents of ``cid`` in any context, plus the
    lifted parents a derived concept gains from its base's parents."""
    parents = [a.b for a in kb.categorical_of(CategorizerKind.AKO) if a.a == cid]
    concept = kb.concepts.get(cid)
    if concept is not None and concept.derived_from is not None:
        prop, of = concept.derived_from
        for base_parent in direct_ancestors(kb, of):
            lifted = kb.derived_id(prop, base_parent)
            if lifted is not None:
                parents.append(lifted)
    return parents


def applicable_property(kb: KnowledgeBase, prop: str, cid: str) -> bool:
    """Is ``prop`` declared on ``cid`` or on any specialization ancestor?

    ``presence`` applies to every concept.
    """
    if prop == PRESENCE:
        return True
    seen: set[str] = set()
    stack = [cid]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        concept = kb.concepts.get(current)
        if concept is not None and prop in concept.properties:
            return True
        stack.extend(direct_ancestors(kb, current))
    return False


def derive_concept(kb: KnowledgeBase, prop: str, of: str) -> str:
    """Return the id of the derived concept ``<prop>-of-<of>``.

    Registers the concept if it does not exist yet; idempotent. The
    property must be declared on ``of``, inherited from one of its
    specialization ancestors, or be the built-in ``presence``. This is the
    one operation that may grow an already loaded knowledge base.
    """
    kb.require(prop, of)
    if not applicable_property(kb, prop, of):
        raise UnknownPropertyError(f"property {prop!r} is not applicable to {of!r}")
    existing = kb.derived_id(prop, of)
    if existing is not None:
        return existing
    cid = f"{prop}{DERIVED_SEP}{of}"
    if cid in kb.concepts:
        # The id was declared as a base concept before the property became
        # applicable; ids must stay unambiguous.
        raise UnknownConceptError(f"{cid!r} already names a non-derived concept")
    kb._register(Concept(cid, derived_from=(prop, of)))
    return cid


# ---------------------------------------------------------------------------
# Property values
# ---------------------------------------------------------------------------


def property_values(kb: KnowledgeBase, cid: str, prop: str, active: Context) -> tuple[str, ...]:
    """The value list of ``prop`` on ``cid`` under ``active``.

    A direct assignment wins; otherwise the assignment of the nearest
    specialization ancestor applies (ties by lexicographic ancestor id,
    with a warning). Equivalent concepts share assignments. ``presence``
    falls back to ``(present, absent)`` when nothing is assigned.
    """
    kb.require(cid, prop)
    kb.require_context(active)

    forest = _eqv_forest(kb, active)
    visible_edges: dict[str, set[str]] = defaultdict(set)
    for assertion in kb.categorical_of(CategorizerKind.AKO):
        if context_visible(assertion.context, active, kb):
            visible_edges[assertion.a].add(assertion.b)
    # Lifted copies of visible edges, so derived concepts inherit values.
    for concept in list(kb.concepts.values()):
        if concept.derived_from is None:
            continue
        lifted_prop, of = concept.derived_from
        for parent in visible_edges.get(of, set()).copy():
            lifted = kb.derived_id(lifted_prop, parent)
            if lifted is not None:
                visible_edges[concept.id].add(lifted)

    level = sorted(forest.members(cid))
    seen: set[str] = set(level)
    while level:
        holders = sorted(member for member in level if (member, prop) in kb.assignments)
        if holders:
            if len(holders) > 1:
                log.warning(
                    "property %r on %r: assignments on %s tie at the same distance; using %r",
                    prop,
                    cid,
                    ", ".join(repr(h) for h in holders),
                    holders[0],
                )
            return kb.assignments[(holders[0], prop)]
        parents: set[str] = set()
        for member in level:
            for parent in visible_edges.get(member, ()):
                parents.update(forest.members(parent))
        level = sorted(parents - seen)
        seen.update(level)

    if prop == PRESENCE:
        return (PRESENT, ABSENT)
    raise UnknownPropertyError(f"property {prop!r} has no values on {cid!r} or its ancestors")
