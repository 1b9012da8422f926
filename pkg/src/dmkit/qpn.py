"""Qualitative decision models: signed acyclic influence graphs.

A model has decision nodes (boxes), chance nodes (ellipses) and exactly
one value node (diamond) carrying the evaluation criterion. Edges carry a
qualitative sign: ``+`` (plus), ``-`` (minus) or ``?`` (ambiguous); ``0``
only arises as the net influence between disconnected nodes.

Signs form an algebra: products compose signs along a path and sums
combine parallel paths. Net influence between two nodes is the sign sum
over all directed paths of the per-path sign products, computed by
dynamic programming in topological order. Chance nodes can be reduced
away without changing any net influence among the remaining nodes.

The text format, one statement per line::

    node NAME kind=(decision|chance|value) [values=V1,V2,...]
    edge A -> B sign=(+|-|?)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    CyclicModelError,
    Diagnostic,
    ModelError,
    NoDecisionNodeError,
    NoValueNodeError,
    QpnParseError,
)
from .interactions import InfluenceSign, InteractionAssertion, InteractionKind, Precedence
from .kb import ABSENT, PRESENT, KnowledgeBase, ako_children, is_valid_id
from .planner import DomainContext, ProblemFormulation


class EvalSign(Enum):
    PLUS = "+"
    MINUS = "-"
    ZERO = "0"
    AMBIGUOUS = "?"


_PRODUCT: dict[tuple[EvalSign, EvalSign], EvalSign] = {}
_SUM: dict[tuple[EvalSign, EvalSign], EvalSign] = {}


def _fill_tables() -> None:
    P, M, Z, A = EvalSign.PLUS, EvalSign.MINUS, EvalSign.ZERO, EvalSign.AMBIGUOUS
    for x in EvalSign:
        _PRODUCT[(Z, x)] = _PRODUCT[(x, Z)] = Z
        _SUM[(Z, x)] = _SUM[(x, Z)] = x
        _SUM[(x, x)] = x
    for x in (P, M, A):
        _PRODUCT[(P, x)] = _PRODUCT[(x, P)] = x
        _PRODUCT[(A, x)] = _PRODUCT[(x, A)] = A
        _SUM[(A, x)] = _SUM[(x, A)] = A
    _PRODUCT[(M, M)] = P
    _PRODUCT[(M, A)] = _PRODUCT[(A, M)] = A
    _SUM[(P, M)] = _SUM[(M, P)] = A


_fill_tables()


def sign_product(x: EvalSign, y: EvalSign) -> EvalSign:
    """Compose two signs along a path."""
    return _PRODUCT[(x, y)]


def sign_sum(x: EvalSign, y: EvalSign) -> EvalSign:
    """Combine the signs of two parallel paths."""
    return _SUM[(x, y)]


class NodeKind(Enum):
    DECISION = "decision"
    CHANCE = "chance"
    VALUE = "value"


@dataclass(frozen=True)
class QpnNode:
    concept: str
    kind: NodeKind
    values: tuple[str, ...] = ()


@dataclass(frozen=True)
class QpnEdge:
    source: str
    target: str
    sign: EvalSign
    #: The interaction the edge came from, when built from a formulation.
    origin: InteractionAssertion | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Qpn:
    """An immutable signed model graph in canonical (sorted) order."""

    nodes: tuple[QpnNode, ...]
    edges: tuple[QpnEdge, ...]
    criterion: str

    def node(self, concept: str) -> QpnNode:
        for node in self.nodes:
            if node.concept == concept:
                return node
        raise ModelError(f"model has no node {concept!r}")

    def has_node(self, concept: str) -> bool:
        return any(node.concept == concept for node in self.nodes)

    def successors(self, concept: str) -> list[QpnEdge]:
        return [edge for edge in self.edges if edge.source == concept]

    def predecessors(self, concept: str) -> list[QpnEdge]:
        return [edge for edge in self.edges if edge.target == concept]

    def decisions(self) -> list[QpnNode]:
        return [node for node in self.nodes if node.kind is NodeKind.DECISION]


def build_qpn(nodes: Iterable[QpnNode], edges: Iterable[QpnEdge], criterion: str) -> Qpn:
    """Canonicalize and validate a model graph."""
    qpn = Qpn(
        tuple(sorted(nodes, key=lambda n: n.concept)),
        tuple(sorted(edges, key=lambda e: (e.source, e.target))),
        criterion,
    )
    validate_qpn(qpn)
    return qpn


def validate_qpn(qpn: Qpn) -> None:
    """Check the structural invariants; raise a :class:`ModelError`."""
    ids = [node.concept for node in qpn.nodes]
    id_set = set(ids)
    if len(ids) != len(id_set):
        raise ModelError("duplicate node ids in model")
    values = [node for node in qpn.nodes if node.kind is NodeKind.VALUE]
    if not values:
        raise NoValueNodeError("model has no value node")
    if len(values) > 1 or values[0].concept != qpn.criterion:
        raise ModelError("model must have exactly one value node carrying the criterion")
    if not any(node.kind is NodeKind.DECISION for node in qpn.nodes):
        raise NoDecisionNodeError("model has no decision node")
    kinds = {node.concept: node.kind for node in qpn.nodes}
    for edge in qpn.edges:
        if edge.source not in id_set or edge.target not in id_set:
            raise ModelError(f"edge {edge.source!r} -> {edge.target!r} leaves the node set")
        if edge.source == edge.target:
            raise ModelError(f"self-edge on {edge.source!r}")
        if edge.sign is EvalSign.ZERO:
            raise ModelError("edges never carry the zero sign")
        if kinds[edge.source] is NodeKind.VALUE:
            raise ModelError("the value node has no outgoing edges")
        if kinds[edge.target] is NodeKind.DECISION:
            raise ModelError(f"decision node {edge.target!r} cannot have incoming edges")
    topological_order(qpn)  # raises CyclicModelError on a cycle


def topological_order(qpn: Qpn) -> list[str]:
    """Node ids in dependency order; raises on a cycle, naming it."""
    incoming = {node.concept: 0 for node in qpn.nodes}
    for edge in qpn.edges:
        incoming[edge.target] += 1
    ready = sorted(concept for concept, count in incoming.items() if count == 0)
    order: list[str] = []
    while ready:
        current = ready.pop(0)
        order.append(current)
        inserted = False
        for edge in qpn.successors(current):
            incoming[edge.target] -= 1
            if incoming[edge.target] == 0:
                ready.append(edge.target)
                inserted = True
        if inserted:
            ready.sort()
    if len(order) != len(qpn.nodes):
        leftover = tuple(concept for concept, count in incoming.items() if count > 0)
        raise CyclicModelError(leftover)
    return order


# ---------------------------------------------------------------------------
# Construction from a formulation
# ---------------------------------------------------------------------------


def excluded_associations(formulation: ProblemFormulation) -> list[InteractionAssertion]:
    """Selected assertions that cannot enter the model (undirectable)."""
    return [a for a in formulation.selected if a.kind is InteractionKind.ASSOCIATION]


def _edge_sign(assertion: InteractionAssertion) -> EvalSign | None:
    if assertion.sign is InfluenceSign.POSITIVE:
        return EvalSign.PLUS
    if assertion.sign is InfluenceSign.NEGATIVE:
        return EvalSign.MINUS
    if assertion.prec is Precedence.KNOWN:
        return EvalSign.AMBIGUOUS
    return None  # association: no direction of influence to encode


def construct_model(
    kb: KnowledgeBase, formulation: ProblemFormulation, ctx: DomainContext
) -> Qpn:
    """Build the signed model graph for a formulated problem.

    Concepts become nodes keyed by role (alternative -> decision,
    criterion -> value, rest -> chance), except that a collected
    specialization child with no interactions of its own folds into its
    parent as one of the parent's outcome values. Influence and precedence
    assertions become edges (parallel ones merge by sign sum); pure
    associations stay out of the graph (see
    :func:`excluded_associations`).
    """
    roles = formulation.roles
    touched: set[str] = set()
    for assertion in formulation.selected:
        if assertion.kind is not InteractionKind.ASSOCIATION:
            touched.update((assertion.source, assertion.target))

    parents: dict[str, list[str]] = {cid: [] for cid in roles}
    ctx_active = ctx.as_context
    for cid in roles:
        for child in ako_children(kb, cid, ctx_active):
            if child in parents:
                parents[child].append(cid)

    absorbed: dict[str, str] = {}
    for cid in sorted(roles):
        if roles[cid] != "outcome" or cid in touched:
            continue
        candidates = sorted(p for p in parents.get(cid, ()) if p not in absorbed and roles[p] != "criterion")
        if candidates:
            absorbed[cid] = candidates[0]

    values_of: dict[str, list[str]] = {}
    for child, parent in sorted(absorbed.items()):
        values_of.setdefault(parent, []).append(child)

    nodes: list[QpnNode] = []
    for cid in sorted(roles):
        if cid in absorbed:
            continue
        role = roles[cid]
        if role == "criterion":
            nodes.append(QpnNode(cid, NodeKind.VALUE))
        elif role == "alternative":
            nodes.append(QpnNode(cid, NodeKind.DECISION, (PRESENT, ABSENT)))
        else:
            children = values_of.get(cid)
            values = tuple(sorted(children)) + (ABSENT,) if children else (PRESENT, ABSENT)
            nodes.append(QpnNode(cid, NodeKind.CHANCE, values))

    merged: dict[tuple[str, str], QpnEdge] = {}
    for assertion in formulation.selected:
        sign = _edge_sign(assertion)
        if sign is None:
            continue
        key = (assertion.source, assertion.target)
        existing = merged.get(key)
        if existing is None:
            merged[key] = QpnEdge(assertion.source, assertion.target, sign, assertion)
        else:
            merged[key] = QpnEdge(
                existing.source, existing.target, sign_sum(existing.sign, sign), existing.origin
            )
    return build_qpn(nodes, merged.values(), formulation.criterion)


# ---------------------------------------------------------------------------
# Propagation, reduction, evaluation
# ---------------------------------------------------------------------------


def net_influence(qpn: Qpn, source: str, target: str) -> EvalSign:
    """The combined influence of ``source`` on ``target`` over all paths.

    Zero when no path connects them; the empty path makes a node's
    influence on itself plus.
    """
    qpn.node(source)
    qpn.node(target)
    influence: dict[str, EvalSign] = {node.concept: EvalSign.ZERO for node in qpn.nodes}
    influence[source] = EvalSign.PLUS
    for concept in topological_order(qpn):
        current = influence[concept]
        if current is EvalSign.ZERO:
            continue
        for edge in qpn.successors(concept):
            contribution = sign_product(current, edge.sign)
            influence[edge.target] = sign_sum(influence[edge.target], contribution)
    return influence[target]


def reduce_node(qpn: Qpn, concept: str) -> Qpn:
    """Remove a chance node, rewiring predecessor-successor pairs.

    Every path through the node collapses into a composed edge (sign
    product), merging with any existing parallel edge by sign sum. Net
    influences among the remaining nodes are unchanged.
    """
    node = qpn.node(concept)
    if node.kind is not NodeKind.CHANCE:
        raise ModelError(f"only chance nodes can be reduced, not {node.kind.value!r}")
    incoming = qpn.predecessors(concept)
    outgoing = qpn.successors(concept)
    merged: dict[tuple[str, str], QpnEdge] = {
        (edge.source, edge.target): edge
        for edge in qpn.edges
        if concept not in (edge.source, edge.target)
    }
    for pre in incoming:
        for post in outgoing:
            sign = sign_product(pre.sign, post.sign)
            key = (pre.source, post.target)
            existing = merged.get(key)
            if existing is None:
                merged[key] = QpnEdge(pre.source, post.target, sign)
            else:
                merged[key] = QpnEdge(
                    existing.source, existing.target, sign_sum(existing.sign, sign), existing.origin
                )
    nodes = [node for node in qpn.nodes if node.concept != concept]
    return build_qpn(nodes, merged.values(), qpn.criterion)


def enumerate_paths(qpn: Qpn, source: str, target: str) -> Iterator[tuple[str, ...]]:
    """All directed paths from ``source`` to ``target`` (node id tuples)."""

    def extend(path: list[str]) -> Iterator[tuple[str, ...]]:
        tip = path[-1]
        if tip == target:
            yield tuple(path)
            return
        for edge in qpn.successors(tip):
            yield from extend(path + [edge.target])

    yield from extend([source])


def _path_sign(qpn: Qpn, path: tuple[str, ...]) -> EvalSign:
    sign = EvalSign.PLUS
    edges = {(edge.source, edge.target): edge.sign for edge in qpn.edges}
    for a, b in zip(path, path[1:]):
        sign = sign_product(sign, edges[(a, b)])
    return sign


@dataclass(frozen=True)
class DecisionFinding:
    """How one decision bears on the criterion."""

    decision: str
    sign: EvalSign
    recommendation: str  # favorable | unfavorable | no-effect | tradeoff
    positive_paths: tuple[tuple[str, ...], ...] = ()
    negative_paths: tuple[tuple[str, ...], ...] = ()
    ambiguous_paths: tuple[tuple[str, ...], ...] = ()

    def render(self) -> str:
        if self.recommendation != "tradeoff":
            return f"{self.decision}: {self.recommendation}"
        fragments = []
        for label, paths in (
            ("+", self.positive_paths),
            ("-", self.negative_paths),
            ("?", self.ambiguous_paths),
        ):
            if paths:
                vias = sorted({path[1] for path in paths})
                fragments.append(f"{label} via {', '.join(vias)} path")
        return f"{self.decision}: tradeoff ({', '.join(fragments)})"


_RECOMMENDATION = {
    EvalSign.PLUS: "favorable",
    EvalSign.MINUS: "unfavorable",
    EvalSign.ZERO: "no-effect",
    EvalSign.AMBIGUOUS: "tradeoff",
}


@dataclass(frozen=True)
class EvaluationReport:
    criterion: str
    findings: tuple[DecisionFinding, ...]

    def render(self) -> list[str]:
        return [finding.render() for finding in self.findings]


def evaluate_model(qpn: Qpn) -> EvaluationReport:
    """Judge every decision by its net influence on the criterion.

    Plus is favorable, minus unfavorable, zero no-effect. An ambiguous net
    influence is a tradeoff and the finding carries the opposing path
    families so the opposing mechanisms can be cited.
    """
    findings = []
    for decision in qpn.decisions():
        sign = net_influence(qpn, decision.concept, qpn.criterion)
        positive: list[tuple[str, ...]] = []
        negative: list[tuple[str, ...]] = []
        ambiguous: list[tuple[str, ...]] = []
        if sign is EvalSign.AMBIGUOUS:
            for path in enumerate_paths(qpn, decision.concept, qpn.criterion):
                bucket = {
                    EvalSign.PLUS: positive,
                    EvalSign.MINUS: negative,
                    EvalSign.AMBIGUOUS: ambiguous,
                }[_path_sign(qpn, path)]
                bucket.append(path)
        findings.append(
            DecisionFinding(
                decision.concept,
                sign,
                _RECOMMENDATION[sign],
                tuple(sorted(positive)),
                tuple(sorted(negative)),
                tuple(sorted(ambiguous)),
            )
        )
    return EvaluationReport(qpn.criterion, tuple(findings))


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

_NODE_RE = re.compile(r"node\s+(?P<id>\S+)\s+kind=(?P<kind>\S+)(?:\s+values=(?P<values>\S+))?")
_EDGE_RE = re.compile(r"edge\s+(?P<a>\S+)\s*->\s*(?P<b>\S+)\s+sign=(?P<sign>\S+)")

_EDGE_SIGNS = {s.value: s for s in (EvalSign.PLUS, EvalSign.MINUS, EvalSign.AMBIGUOUS)}


def serialize_qpn(qpn: Qpn) -> str:
    """Canonical text for a model; reparsing yields an equal model."""
    lines = []
    for node in sorted(qpn.nodes, key=lambda n: n.concept):
        line = f"node {node.concept} kind={node.kind.value}"
        if node.values:
            line += f" values={','.join(node.values)}"
        lines.append(line)
    for edge in sorted(qpn.edges, key=lambda e: (e.source, e.target)):
        lines.append(f"edge {edge.source} -> {edge.target} sign={edge.sign.value}")
    return "\n".join(lines) + "\n"


def parse_qpn(text: str) -> Qpn:
    """Parse the model format; raise :class:`QpnParseError` with all
    diagnostics if anything is wrong."""
    diags: list[Diagnostic] = []
    nodes: dict[str, QpnNode] = {}
    edges: list[QpnEdge] = []
    criterion: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "node":
            match = _NODE_RE.fullmatch(line)
            if match is None:
                diags.append(Diagnostic(lineno, "malformed node statement"))
                continue
            concept = match.group("id")
            if not is_valid_id(concept):
                diags.append(Diagnostic(lineno, f"invalid node id {concept!r}"))
                continue
            if concept in nodes:
                diags.append(Diagnostic(lineno, f"duplicate node {concept!r}"))
                continue
            try:
                kind = NodeKind(match.group("kind"))
            except ValueError:
                diags.append(Diagnostic(lineno, f"unknown node kind {match.group('kind')!r}"))
                continue
            values_text = match.group("values")
            values: tuple[str, ...] = ()
            if values_text:
                parts = values_text.split(",")
                if not all(is_valid_id(part) for part in parts):
                    diags.append(Diagnostic(lineno, f"invalid value list {values_text!r}"))
                    continue
                values = tuple(parts)
            nodes[concept] = QpnNode(concept, kind, values)
            if kind is NodeKind.VALUE and criterion is None:
                criterion = concept
        elif head == "edge":
            match = _EDGE_RE.fullmatch(line)
            if match is None:
                diags.append(Diagnostic(lineno, "malformed edge statement"))
                continue
            sign = _EDGE_SIGNS.get(match.group("sign"))
            if sign is None:
                diags.append(Diagnostic(lineno, f"edge sign must be one of +,-,? not {match.group('sign')!r}"))
                continue
            a, b = match.group("a"), match.group("b")
            for endpoint in (a, b):
                if endpoint not in nodes:
                    diags.append(Diagnostic(lineno, f"edge references undeclared node {endpoint!r}"))
            if a in nodes and b in nodes:
                edges.append(QpnEdge(a, b, sign))
        else:
            diags.append(Diagnostic(lineno, f"unrecognized statement {head!r}"))
    if diags:
        raise QpnParseError(diags)
    return build_qpn(nodes.values(), edges, criterion if criterion is not None else "")


def export_dot(qpn: Qpn) -> str:
    """Graphviz text: decisions as boxes, chance nodes as ellipses, the
    value node as a diamond; edges labelled with their sign."""
    shape = {NodeKind.DECISION: "box", NodeKind.CHANCE: "ellipse", NodeKind.VALUE: "diamond"}
    lines = ["digraph model {"]
    for node in sorted(qpn.nodes, key=lambda n: n.concept):
        lines.append(f"  {_dot_id(node.concept)} [shape={shape[node.kind]}];")
    for edge in sorted(qpn.edges, key=lambda e: (e.source, e.target)):
        lines.append(
            f"  {_dot_id(edge.source)} -> {_dot_id(edge.target)} [label=\"{edge.sign.value}\"];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


_BARE_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _dot_id(name: str) -> str:
    if _BARE_DOT_ID.fullmatch(name):
        return name
    return f'"{name}"'
