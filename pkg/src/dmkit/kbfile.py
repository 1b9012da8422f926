"""Reading and writing the line-oriented knowledge-base format.

Statements, one per line (``#`` starts a comment, blank lines ignored)::

    concept NAME
    property NAME.PROP
    value NAME.PROP = V1,V2,...
    ako A B [@ C1+C2+...]
    partof A B [@ ...]
    eqv A B [@ ...]
    link A -> B sign=(+|-|?) prec=(known|unknown) [sig=FLOAT] [@ ...]

Parsing is all-or-nothing: every problem in the file is collected and
reported together, and no partial knowledge base is ever returned.

Ids of the shape ``<property>-of-<concept>`` need not be declared when the
prefix names a property applicable to the resolved remainder; such
references register the derived concept on the fly. Explicit declarations
with a resolvable name are treated the same way, so a serialized knowledge
base reparses to an equal one.
"""

from __future__ import annotations

import re
from collections import defaultdict

from .errors import Diagnostic, KbLoadError
from .interactions import InfluenceSign, InteractionAssertion, Precedence
from .kb import (
    BUILTIN_CONCEPTS,
    DERIVED_SEP,
    PRESENCE,
    UNIVERSAL,
    CategoricalAssertion,
    CategorizerKind,
    Concept,
    Context,
    KnowledgeBase,
    is_valid_id,
    normalize_id,
)

_CONCEPT_RE = re.compile(r"concept\s+(?P<id>\S+)")
_PROPERTY_RE = re.compile(r"property\s+(?P<owner>[^.\s]+)\.(?P<prop>\S+)")
_VALUE_RE = re.compile(r"value\s+(?P<owner>[^.\s]+)\.(?P<prop>\S+)\s*=\s*(?P<values>.*)")
_CATEGORICAL_RE = re.compile(r"(?P<kind>ako|partof|eqv)\s+(?P<a>\S+)\s+(?P<b>\S+)")
_LINK_RE = re.compile(r"link\s+(?P<a>\S+)\s*->\s*(?P<b>\S+)(?P<rest>.*)")

_SIGNS = {sign.value: sign for sign in InfluenceSign}
_PRECEDENCES = {prec.value: prec for prec in Precedence}


class _Loader:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []
        self.concepts: dict[str, Concept] = {cid: Concept(cid) for cid in BUILTIN_CONCEPTS}
        self.declared_lines: dict[str, int] = {}
        self.props: dict[str, set[str]] = defaultdict(set)
        self.assignments: dict[tuple[str, str], tuple[str, ...]] = {}
        self.raw_parents: dict[str, set[str]] = defaultdict(set)
        self.categorical: list[CategoricalAssertion] = []
        self.interactions: list[InteractionAssertion] = []
        self._tracing: set[str] = set()

    def error(self, line: int, message: str) -> None:
        self.diags.append(Diagnostic(line, message))

    # -- id resolution ----------------------------------------------------

    def _norm(self, line: int, text: str) -> str | None:
        try:
            return normalize_id(text)
        except ValueError:
            self.error(line, f"invalid concept id {text!r}")
            return None

    def _split_derived(self, cid: str) -> tuple[str, str] | None:
        """Leftmost split ``prop -of- rest`` with a usable property and a
        resolvable remainder."""
        start = 0
        while True:
            index = cid.find(DERIVED_SEP, start)
            if index <= 0:
                return None
            prop, rest = cid[:index], cid[index + len(DERIVED_SEP) :]
            start = index + 1
            if not (is_valid_id(prop) and is_valid_id(rest)):
                continue
            if prop not in self.concepts:
                continue
            if not self._resolvable(rest):
                continue
            if self._applicable(prop, rest):
                return prop, rest

    def _resolvable(self, cid: str) -> bool:
        return cid in self.concepts or self._split_derived(cid) is not None

    def _ancestor_ids(self, cid: str) -> set[str]:
        """Specialization ancestors at the text level, including the lifted
        ancestors a derived id gains from its base.

        A shared in-progress set cuts degenerate self-referential
        hierarchies; partial answers there only under-approximate.
        """
        if cid in self._tracing:
            return set()
        self._tracing.add(cid)
        try:
            seen: set[str] = set()
            stack = [cid]
            while stack:
                current = stack.pop()
                if current in seen:
                    continue
                seen.add(current)
                stack.extend(self.raw_parents.get(current, ()))
                split = None
                if current in self.concepts:
                    split = self.concepts[current].derived_from
                if split is None:
                    split = self._split_derived(current)
                if split is not None:
                    prop, of = split
                    for base_parent in self._ancestor_ids(of):
                        lifted = f"{prop}{DERIVED_SEP}{base_parent}"
                        if self._resolvable(lifted):
                            stack.append(lifted)
            seen.discard(cid)
            return seen
        finally:
            self._tracing.discard(cid)

    def _applicable(self, prop: str, cid: str) -> bool:
        if prop == PRESENCE:
            return True
        if prop in self.props.get(cid, ()):
            return True
        return any(prop in self.props.get(ancestor, ()) for ancestor in self._ancestor_ids(cid))

    def _register_derived(self, cid: str) -> None:
        split = self._split_derived(cid)
        assert split is not None
        prop, rest = split
        if rest not in self.concepts:
            self._register_derived(rest)
        existing = self.concepts.get(cid)
        if existing is None:
            self.concepts[cid] = Concept(cid, derived_from=(prop, rest))
        elif existing.derived_from is None:
            self.concepts[cid] = Concept(cid, derived_from=(prop, rest), properties=existing.properties)

    def resolve(self, line: int, text: str) -> str | None:
        cid = self._norm(line, text)
        if cid is None:
            return None
        if cid in self.concepts:
            return cid
        if self._split_derived(cid) is not None:
            self._register_derived(cid)
            return cid
        self.error(line, f"unknown concept {cid!r}")
        return None

    def resolve_context(self, line: int, text: str | None) -> Context | None:
        if text is None or not text.strip():
            if text is not None:
                self.error(line, "empty context after '@'")
                return None
            return UNIVERSAL
        conditions = []
        for part in text.split("+"):
            cid = self.resolve(line, part.strip())
            if cid is None:
                return None
            conditions.append(cid)
        return Context(frozenset(conditions))


def _statements(text: str) -> list[tuple[int, str, str | None]]:
    """Split into (line number, statement, context text or None)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "@" in line:
            stmt, ctx = line.split("@", 1)
            out.append((lineno, stmt.strip(), ctx.strip()))
        else:
            out.append((lineno, line, None))
    return out


def parse_kb(text: str) -> KnowledgeBase:
    """Parse the knowledge-base format; raise :class:`KbLoadError` with all
    diagnostics if anything is wrong."""
    loader = _Loader()
    statements = _statements(text)

    concept_stmts = []
    property_stmts = []
    value_stmts = []
    categorical_stmts = []
    link_stmts = []
    for lineno, stmt, ctx in statements:
        head = stmt.split(None, 1)[0]
        if head == "concept":
            concept_stmts.append((lineno, stmt, ctx))
        elif head == "property":
            property_stmts.append((lineno, stmt, ctx))
        elif head == "value":
            value_stmts.append((lineno, stmt, ctx))
        elif head in ("ako", "partof", "eqv"):
            categorical_stmts.append((lineno, stmt, ctx))
        elif head == "link":
            link_stmts.append((lineno, stmt, ctx))
        else:
            loader.error(lineno, f"unrecognized statement {head!r}")

    # Concept declarations first: everything else may reference them.
    for lineno, stmt, ctx in concept_stmts:
        if ctx is not None:
            loader.error(lineno, "concept declarations take no context")
        match = _CONCEPT_RE.fullmatch(stmt)
        if match is None:
            loader.error(lineno, "malformed concept declaration")
            continue
        cid = loader._norm(lineno, match.group("id"))
        if cid is None:
            continue
        if cid in BUILTIN_CONCEPTS:
            loader.error(lineno, f"{cid!r} is built in and cannot be redeclared")
        elif cid in loader.declared_lines:
            loader.error(lineno, f"duplicate declaration of {cid!r}")
        else:
            loader.declared_lines[cid] = lineno
            loader.concepts[cid] = Concept(cid)

    # Raw specialization pairs drive property inheritance during loading.
    for lineno, stmt, ctx in categorical_stmts:
        match = _CATEGORICAL_RE.fullmatch(stmt)
        if match is not None and match.group("kind") == "ako":
            try:
                a = normalize_id(match.group("a"))
                b = normalize_id(match.group("b"))
            except ValueError:
                continue
            loader.raw_parents[a].add(b)

    # Property declarations may depend on one another through derived
    # owners, so apply them to a fixed point.
    pending = list(property_stmts)
    while pending:
        progressed = False
        remaining = []
        for item in pending:
            lineno, stmt, ctx = item
            if ctx is not None:
                loader.error(lineno, "property declarations take no context")
                progressed = True
                continue
            match = _PROPERTY_RE.fullmatch(stmt)
            if match is None:
                loader.error(lineno, "malformed property declaration")
                progressed = True
                continue
            owner_text, prop_text = match.group("owner"), match.group("prop")
            try:
                owner = normalize_id(owner_text)
                prop = normalize_id(prop_text)
            except ValueError:
                loader.error(lineno, f"invalid id in property declaration {stmt!r}")
                progressed = True
                continue
            if loader._resolvable(owner) and loader._resolvable(prop):
                owner = loader.resolve(lineno, owner_text)
                prop = loader.resolve(lineno, prop_text)
                if owner is not None and prop is not None:
                    loader.props[owner].add(prop)
                    existing = loader.concepts[owner]
                    loader.concepts[owner] = Concept(
                        owner, existing.derived_from, existing.properties | {prop}
                    )
                progressed = True
            else:
                remaining.append(item)
        if not progressed:
            for lineno, stmt, ctx in remaining:
                loader.error(lineno, f"unknown concept in property declaration {stmt!r}")
            break
        pending = remaining

    # Resolve explicitly declared names that turn out to be derivable, so
    # declared and on-the-fly derived concepts are indistinguishable.
    for cid in sorted(loader.declared_lines):
        if DERIVED_SEP in cid and loader._split_derived(cid) is not None:
            loader._register_derived(cid)

    for lineno, stmt, ctx in value_stmts:
        if ctx is not None:
            loader.error(lineno, "value assignments take no context")
        match = _VALUE_RE.fullmatch(stmt)
        if match is None:
            loader.error(lineno, "malformed value assignment")
            continue
        owner = loader.resolve(lineno, match.group("owner"))
        prop = loader.resolve(lineno, match.group("prop"))
        if owner is None or prop is None:
            continue
        if not loader._applicable(prop, owner):
            loader.error(lineno, f"property {prop!r} is not applicable to {owner!r}")
            continue
        values = []
        ok = True
        values_text = match.group("values").strip()
        for part in values_text.split(",") if values_text else []:
            value = loader.resolve(lineno, part.strip())
            if value is None:
                ok = False
                continue
            values.append(value)
        if not ok:
            continue
        if (owner, prop) in loader.assignments:
            loader.error(lineno, f"duplicate value assignment for {owner}.{prop}")
            continue
        loader.assignments[(owner, prop)] = tuple(values)

    for lineno, stmt, ctx_text in categorical_stmts:
        match = _CATEGORICAL_RE.fullmatch(stmt)
        if match is None:
            loader.error(lineno, "malformed categorical assertion")
            continue
        kind = CategorizerKind(match.group("kind"))
        a = loader.resolve(lineno, match.group("a"))
        b = loader.resolve(lineno, match.group("b"))
        context = loader.resolve_context(lineno, ctx_text)
        if a is None or b is None or context is None:
            continue
        if a == b and kind is not CategorizerKind.EQV:
            loader.error(lineno, f"{kind.value} is irreflexive; {a!r} cannot {kind.value} itself")
            continue
        if kind is CategorizerKind.AKO:
            a_concept = loader.concepts[a]
            b_concept = loader.concepts[b]
            if (
                a_concept.derived_from is not None
                and b_concept.derived_from is not None
                and a_concept.derived_from[0] == b_concept.derived_from[0]
            ):
                loader.error(
                    lineno,
                    f"ako between {a!r} and {b!r} follows from the hierarchy; "
                    f"assert ako {a_concept.derived_from[1]} {b_concept.derived_from[1]} instead",
                )
                continue
        loader.categorical.append(CategoricalAssertion(kind, a, b, context))

    for lineno, stmt, ctx_text in link_stmts:
        match = _LINK_RE.fullmatch(stmt)
        if match is None:
            loader.error(lineno, "malformed link assertion")
            continue
        a = loader.resolve(lineno, match.group("a"))
        b = loader.resolve(lineno, match.group("b"))
        context = loader.resolve_context(lineno, ctx_text)
        sign: InfluenceSign | None = None
        prec: Precedence | None = None
        significance = 0.5
        ok = True
        for token in match.group("rest").split():
            key, _, value = token.partition("=")
            if key == "sign" and value in _SIGNS:
                sign = _SIGNS[value]
            elif key == "prec" and value in _PRECEDENCES:
                prec = _PRECEDENCES[value]
            elif key == "sig":
                try:
                    significance = float(value)
                except ValueError:
                    loader.error(lineno, f"malformed significance {value!r}")
                    ok = False
            else:
                loader.error(lineno, f"unrecognized link token {token!r}")
                ok = False
        if sign is None or prec is None:
            loader.error(lineno, "link requires sign=(+|-|?) and prec=(known|unknown)")
            ok = False
        if not ok or a is None or b is None or context is None:
            continue
        if a == b:
            loader.error(lineno, f"link source and target coincide: {a!r}")
            continue
        if not 0.0 <= significance <= 1.0:
            loader.error(lineno, f"significance {significance!r} outside [0, 1]")
            continue
        loader.interactions.append(
            InteractionAssertion(a, b, sign, prec, context, significance)
        )

    # Specialization must be acyclic in every context view; the union of
    # all views is itself a view, so one check on the full graph suffices.
    cycle = _find_cycle({a: set(bs) for a, bs in loader.raw_parents.items()})
    if cycle:
        loader.error(0, "specialization cycle through: " + ", ".join(sorted(cycle)))

    if loader.diags:
        raise KbLoadError(loader.diags)

    return KnowledgeBase(loader.concepts, loader.assignments, loader.categorical, loader.interactions)


def _find_cycle(edges: dict[str, set[str]]) -> set[str]:
    """Nodes on some directed cycle, or empty when the graph is acyclic."""
    state: dict[str, int] = {}
    stack_nodes: list[str] = []

    def visit(node: str) -> set[str]:
        state[node] = 1
        stack_nodes.append(node)
        for succ in edges.get(node, ()):
            if state.get(succ, 0) == 1:
                return set(stack_nodes[stack_nodes.index(succ) :])
            if state.get(succ, 0) == 0:
                found = visit(succ)
                if found:
                    return found
        stack_nodes.pop()
        state[node] = 2
        return set()

    for node in list(edges):
        if state.get(node, 0) == 0:
            found = visit(node)
            if found:
                return found
    return set()


def serialize_kb(kb: KnowledgeBase) -> str:
    """Canonical text for ``kb``; reparsing yields an equal knowledge base."""
    lines: list[str] = []
    for cid in sorted(kb.concepts):
        if cid in BUILTIN_CONCEPTS:
            continue
        lines.append(f"concept {cid}")
    for cid in sorted(kb.concepts):
        for prop in sorted(kb.concepts[cid].properties):
            lines.append(f"property {cid}.{prop}")
    for (owner, prop) in sorted(kb.assignments):
        values = ",".join(kb.assignments[(owner, prop)])
        lines.append(f"value {owner}.{prop} = {values}")
    kind_order = {CategorizerKind.AKO: 0, CategorizerKind.PARTOF: 1, CategorizerKind.EQV: 2}
    for assertion in sorted(
        kb.categorical, key=lambda c: (kind_order[c.kind], c.a, c.b, c.context.name)
    ):
        lines.append(assertion.render())
    for assertion in sorted(
        kb.interactions,
        key=lambda i: (i.source, i.target, i.sign.value, i.prec.value, i.significance, i.context.name),
    ):
        lines.append(assertion.render())
    return "\n".join(lines) + "\n"
