"""From a case description to a formulated decision problem.

The pipeline runs in three steps:

1. :func:`characterize_background` sorts the case inputs into six fixed
   categories (general history, signs/symptoms, laboratory findings,
   diseases, alternatives, complications) by querying the specialization
   hierarchy against the reserved category-root concepts.
2. :func:`establish_context` pairs the suspected diseases with externally
   supplied conditions to fix the active context.
3. :func:`formulate_problem` walks interactions outward from the seed
   concepts, bounded by hop depth and a significance threshold, collects
   candidate outcome values from the specialization hierarchy and tags
   every collected concept with its model role.

A case file uses one statement per line (``#`` comments allowed)::

    input NAME
    condition NAME
    criterion NAME
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CaseLoadError, Diagnostic, EmptyContextError, EngineError
from .interactions import InteractionAssertion, interaction_views, ranking_key
from .kb import (
    UNIVERSAL,
    CategorizerKind,
    Context,
    KnowledgeBase,
    ako_children,
    context_visible,
    normalize_id,
)
from .queries import is_related

#: Reserved specialization roots used to characterize case inputs.
CATEGORY_ROOTS = (
    "general-history",
    "sign-or-symptom",
    "laboratory-finding",
    "disease",
    "alternative",
    "complication",
)

DEFAULT_CRITERION = "quality-adjusted-life-expectancy"

#: Model role per background category; concepts outside every category
#: default to ``outcome``.
_ROLE_FOR_CATEGORY = {
    "general-history": "condition",
    "sign-or-symptom": "finding",
    "laboratory-finding": "finding",
    "disease": "disease",
    "alternative": "alternative",
    "complication": "outcome",
}

ROLES = ("disease", "finding", "alternative", "outcome", "criterion", "condition")


@dataclass(frozen=True)
class CaseDescription:
    """The raw problem statement: observed inputs, externally supplied
    conditions, and the evaluation criterion."""

    inputs: tuple[str, ...]
    conditions: tuple[str, ...] = ()
    criterion: str = DEFAULT_CRITERION


def parse_case(text: str, kb: KnowledgeBase) -> CaseDescription:
    """Parse a case file against ``kb``; collect every problem found."""
    diags: list[Diagnostic] = []
    inputs: list[str] = []
    conditions: list[str] = []
    criterion: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("input", "condition", "criterion"):
            diags.append(Diagnostic(lineno, f"unrecognized case statement {line!r}"))
            continue
        try:
            cid = normalize_id(parts[1])
        except ValueError:
            diags.append(Diagnostic(lineno, f"invalid concept id {parts[1]!r}"))
            continue
        if not kb.has(cid):
            diags.append(Diagnostic(lineno, f"unknown concept {cid!r}"))
            continue
        if parts[0] == "input":
            inputs.append(cid)
        elif parts[0] == "condition":
            conditions.append(cid)
        elif criterion is None:
            criterion = cid
        else:
            diags.append(Diagnostic(lineno, "a case takes at most one criterion"))
    if not inputs:
        diags.append(Diagnostic(0, "a case needs at least one input"))
    if criterion is None:
        criterion = DEFAULT_CRITERION
        if not kb.has(criterion):
            diags.append(Diagnostic(0, f"default criterion {criterion!r} is not declared"))
    if diags:
        raise CaseLoadError(diags)
    return CaseDescription(tuple(inputs), tuple(conditions), criterion)


@dataclass
class BackgroundTable:
    """Case inputs sorted into the six reserved categories."""

    categories: dict[str, list[str]]
    unclassified: list[str]
    warnings: list[str]

    def category_of(self, cid: str) -> list[str]:
        return [root for root, members in self.categories.items() if cid in members]


def characterize_background(kb: KnowledgeBase, case: CaseDescription) -> BackgroundTable:
    """Classify each case input against the reserved category roots.

    An input lands in every category whose root it specializes (several
    draw a warning); inputs matching none are reported unclassified.
    """
    missing = [root for root in CATEGORY_ROOTS if not kb.has(root)]
    if missing:
        raise EngineError(
            "knowledge base lacks reserved category roots: " + ", ".join(missing)
        )
    table = BackgroundTable({root: [] for root in CATEGORY_ROOTS}, [], [])
    seen: set[str] = set()
    for cid in case.inputs:
        if cid in seen:
            continue
        seen.add(cid)
        matches = [
            root
            for root in CATEGORY_ROOTS
            if is_related(kb, UNIVERSAL, cid, root, CategorizerKind.AKO).verdict
        ]
        for root in matches:
            table.categories[root].append(cid)
        if not matches:
            table.unclassified.append(cid)
            table.warnings.append(f"{cid!r} matches no background category")
        elif len(matches) > 1:
            table.warnings.append(f"{cid!r} matches several categories: " + ", ".join(matches))
    return table


@dataclass(frozen=True)
class DomainContext:
    """The task environment: suspected diseases plus active conditions."""

    suspected_diseases: frozenset[str]
    conditions: frozenset[str]

    @property
    def as_context(self) -> Context:
        return Context(self.suspected_diseases | self.conditions)


def establish_context(
    kb: KnowledgeBase, table: BackgroundTable, conditions: tuple[str, ...]
) -> DomainContext:
    """Fix the active context from the characterized diseases and the
    externally supplied conditions."""
    kb.require(*conditions)
    suspected = frozenset(table.categories["disease"])
    condition_set = frozenset(conditions)
    if not suspected and not condition_set:
        raise EmptyContextError("no suspected disease and no condition to anchor a context")
    return DomainContext(suspected, condition_set)


@dataclass(frozen=True)
class ProblemFormulation:
    """The concepts, roles and interactions making up a decision problem."""

    role_tags: tuple[tuple[str, str], ...]
    selected: tuple[InteractionAssertion, ...]
    criterion: str
    warnings: tuple[str, ...] = ()

    @property
    def roles(self) -> dict[str, str]:
        return dict(self.role_tags)

    @property
    def concepts(self) -> frozenset[str]:
        return frozenset(cid for cid, _ in self.role_tags)


def _role_of(
    kb: KnowledgeBase, cid: str, ctx: DomainContext, criterion: str
) -> str:
    if cid == criterion:
        return "criterion"
    if cid in ctx.conditions:
        return "condition"
    for root in ("disease", "alternative", "sign-or-symptom", "laboratory-finding", "complication", "general-history"):
        if kb.has(root) and is_related(kb, UNIVERSAL, cid, root, CategorizerKind.AKO).verdict:
            return _ROLE_FOR_CATEGORY[root]
    return "outcome"


def formulate_problem(
    kb: KnowledgeBase,
    ctx: DomainContext,
    table: BackgroundTable,
    criterion: str = DEFAULT_CRITERION,
    depth_bound: int = 3,
    significance_threshold: float = 0.0,
) -> ProblemFormulation:
    """Select the concepts and interactions of the decision problem.

    Starting from the seeds (characterized diseases, alternatives and
    findings, plus the context conditions), follow interactions of
    sufficient significance outward for at most ``depth_bound`` hops under
    the domain context. Directly asserted specializations of collected
    outcome concepts join as candidate outcome values, and the criterion
    always joins; if no interaction path from the seeds reaches it, a
    ``DisconnectedCriterion`` warning is recorded.
    """
    kb.require(criterion)
    active = ctx.as_context
    kb.require_context(active)

    seeds = sorted(
        set(table.categories["disease"])
        | set(table.categories["alternative"])
        | set(table.categories["sign-or-symptom"])
        | set(table.categories["laboratory-finding"])
        | ctx.conditions
    )
    included: set[str] = set(seeds)
    used: list[InteractionAssertion] = []
    frontier = list(seeds)
    for _ in range(depth_bound):
        discovered: set[str] = set()
        for cid in sorted(frontier):
            for view in interaction_views(kb, cid, active):
                assertion = view.assertion
                if assertion.significance < significance_threshold:
                    continue
                used.append(assertion)
                other = assertion.target if assertion.source == cid else assertion.source
                if other not in included:
                    included.add(other)
                    discovered.add(other)
        if not discovered:
            break
        frontier = sorted(discovered)

    roles = {cid: _role_of(kb, cid, ctx, criterion) for cid in included}
    for cid in sorted(cid for cid, role in roles.items() if role == "outcome"):
        for child in ako_children(kb, cid, active):
            roles.setdefault(child, "outcome")
    roles[criterion] = "criterion"

    concepts = set(roles)
    selected: dict[InteractionAssertion, None] = {}
    for assertion in used:
        if assertion.source in concepts and assertion.target in concepts:
            selected[assertion] = None
    for assertion in kb.interactions:
        if (
            assertion.source in concepts
            and assertion.target in concepts
            and assertion.significance >= significance_threshold
            and context_visible(assertion.context, active, kb)
        ):
            selected[assertion] = None

    ordered = sorted(selected, key=ranking_key)
    warnings: list[str] = []
    if not _reaches(set(seeds), criterion, ordered):
        warnings.append(
            f"DisconnectedCriterion: no interaction path from the seeds reaches {criterion!r}"
        )
    role_tags = tuple(sorted(roles.items()))
    return ProblemFormulation(role_tags, tuple(ordered), criterion, tuple(warnings))


def _reaches(
    sources: set[str], goal: str, assertions: list[InteractionAssertion]
) -> bool:
    reached = set(sources)
    changed = True
    while changed:
        changed = False
        for assertion in assertions:
            if assertion.source in reached and assertion.target not in reached:
                reached.add(assertion.target)
                changed = True
    return goal in reached
