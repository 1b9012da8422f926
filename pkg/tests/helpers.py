"""Oracles and random generators shared by the test suite.

The oracles reimplement the load-bearing algorithms in deliberately
different formulations, so agreement between implementation and oracle is
evidence rather than tautology:

* the sign algebra is modelled as subsets of {+1, -1} under elementwise
  product and set union;
* net influence is explicit enumeration of every directed path;
* the categorizer closure is a global fixpoint over a plain pair set.

The generators produce inputs that are valid by construction (forward
edges only, pools kept apart where mixing could manufacture cycles).
"""

from __future__ import annotations

import random
from collections import defaultdict

from dmkit.kb import UNIVERSAL, CategorizerKind, Context, KnowledgeBase
from dmkit.qpn import EvalSign, NodeKind, Qpn, QpnEdge, QpnNode, build_qpn

# ---------------------------------------------------------------------------
# Sign algebra as subsets of {+1, -1}
# ---------------------------------------------------------------------------

SIGN_AS_SET: dict[EvalSign, frozenset[int]] = {
    EvalSign.ZERO: frozenset(),
    EvalSign.PLUS: frozenset({1}),
    EvalSign.MINUS: frozenset({-1}),
    EvalSign.AMBIGUOUS: frozenset({1, -1}),
}
SET_AS_SIGN = {v: k for k, v in SIGN_AS_SET.items()}


def oracle_product(x: EvalSign, y: EvalSign) -> EvalSign:
    return SET_AS_SIGN[frozenset(a * b for a in SIGN_AS_SET[x] for b in SIGN_AS_SET[y])]


def oracle_sum(x: EvalSign, y: EvalSign) -> EvalSign:
    return SET_AS_SIGN[SIGN_AS_SET[x] | SIGN_AS_SET[y]]


def oracle_net_influence(qpn: Qpn, source: str, target: str) -> EvalSign:
    """Net influence by walking every directed path, no memoization."""
    outgoing: dict[str, list[QpnEdge]] = defaultdict(list)
    for edge in qpn.edges:
        outgoing[edge.source].append(edge)
    total: frozenset[int] = frozenset()

    def walk(node: str, acc: frozenset[int]) -> None:
        nonlocal total
        if node == target:
            total = total | acc
            return
        for edge in outgoing[node]:
            walk(edge.target, frozenset(a * b for a in acc for b in SIGN_AS_SET[edge.sign]))

    if source == target:
        return EvalSign.PLUS
    walk(source, frozenset({1}))
    return SET_AS_SIGN[total]


def all_pairs_net(qpn: Qpn, compute) -> dict[tuple[str, str], EvalSign]:
    names = [node.concept for node in qpn.nodes]
    return {(a, b): compute(qpn, a, b) for a in names for b in names}


# ---------------------------------------------------------------------------
# Naive categorizer closure
# ---------------------------------------------------------------------------


def naive_visible(kb: KnowledgeBase, assertion_ctx: Context, active: Context) -> bool:
    """Visibility recomputed from scratch: each condition must be active or
    generalize (per the naive universal closure) an active condition."""
    if assertion_ctx.is_universal:
        return True
    if active.is_universal:
        return False
    universal_pairs = naive_closure_pairs(kb, CategorizerKind.AKO, UNIVERSAL)
    for condition in assertion_ctx.conditions:
        if condition in active.conditions:
            continue
        if any((member, condition) in universal_pairs for member in active.conditions):
            continue
        return False
    return True


def naive_eqv_classes(kb: KnowledgeBase, active: Context) -> dict[str, frozenset[str]]:
    classes: dict[str, frozenset[str]] = {}
    for assertion in kb.categorical:
        if assertion.kind is not CategorizerKind.EQV:
            continue
        if not naive_visible(kb, assertion.context, active):
            continue
        merged = classes.get(assertion.a, frozenset({assertion.a})) | classes.get(
            assertion.b, frozenset({assertion.b})
        )
        for member in merged:
            classes[member] = merged
    return classes


def naive_closure_pairs(
    kb: KnowledgeBase, kind: CategorizerKind, active: Context
) -> set[tuple[str, str]]:
    """Transitive closure with equivalence substitution and derived lifts,
    computed as a dumb global fixpoint over a pair set.

    The call with a universal active context never recurses (universal
    visibility is decided without a closure), so the bootstrap grounds out.
    """
    classes = naive_eqv_classes(kb, active)

    def cls(cid: str) -> frozenset[str]:
        return classes.get(cid, frozenset({cid}))

    derived = [
        (concept.derived_from[0], concept.derived_from[1], concept.id)
        for concept in kb.concepts.values()
        if concept.derived_from is not None
    ]
    pairs = {
        (assertion.a, assertion.b)
        for assertion in kb.categorical
        if assertion.kind is kind and naive_visible(kb, assertion.context, active)
    }
    while True:
        fresh: set[tuple[str, str]] = set()
        for a, b in pairs:
            for c, d in pairs:
                if b == c:
                    fresh.add((a, d))
            for a2 in cls(a):
                for b2 in cls(b):
                    fresh.add((a2, b2))
            if kind is CategorizerKind.AKO:
                for prop, of, derived_id in derived:
                    if of != a:
                        continue
                    lifted = f"{prop}-of-{b}"
                    lifted_concept = kb.concepts.get(lifted)
                    if lifted_concept is not None and lifted_concept.derived_from == (prop, b):
                        fresh.add((derived_id, lifted))
        if fresh <= pairs:
            return pairs
        pairs |= fresh


# ---------------------------------------------------------------------------
# Random models
# ---------------------------------------------------------------------------

EDGE_SIGNS = (EvalSign.PLUS, EvalSign.MINUS, EvalSign.AMBIGUOUS)


def random_qpn(rng: random.Random, max_nodes: int = 10, max_edges: int = 20) -> Qpn:
    """A random valid model: first node the decision, last the value,
    edges forward in index order so the graph is a DAG by construction."""
    count = rng.randint(3, max_nodes)
    names = [f"n{i:02d}" for i in range(count)]
    nodes = [QpnNode(names[0], NodeKind.DECISION, ("present", "absent"))]
    nodes.extend(QpnNode(name, NodeKind.CHANCE, ("present", "absent")) for name in names[1:-1])
    nodes.append(QpnNode(names[-1], NodeKind.VALUE))
    chosen: set[tuple[int, int]] = set()
    for _ in range(rng.randint(1, max_edges)):
        i = rng.randrange(0, count - 1)
        j = rng.randrange(i + 1, count)
        chosen.add((i, j))
    edges = [QpnEdge(names[i], names[j], rng.choice(EDGE_SIGNS)) for i, j in sorted(chosen)]
    return build_qpn(nodes, edges, names[-1])


def reducible_nodes(qpn: Qpn) -> list[str]:
    return [node.concept for node in qpn.nodes if node.kind is NodeKind.CHANCE]


# ---------------------------------------------------------------------------
# Random knowledge bases
# ---------------------------------------------------------------------------


def random_kb_text(rng: random.Random, max_hier: int = 7, max_links: int = 8) -> str:
    """Text for a knowledge base that always loads.

    Concepts fall into four pools: a specialization hierarchy ``h*`` with
    forward-only ako/partof edges, an equivalence pool ``e*`` that may
    specialize into the hierarchy but is never specialized itself, plain
    concepts ``o*`` carrying no categorical assertions, and two condition
    concepts ``c*`` used in assertion contexts. Every link keeps at least
    one endpoint in the ``o*`` pool, so no concept ever specializes both
    endpoints of one link.
    """
    hier = [f"h{i}" for i in range(rng.randint(2, max_hier))]
    eqv = [f"e{i}" for i in range(rng.randint(0, 3))]
    plain = [f"o{i}" for i in range(rng.randint(1, 4))]
    conds = ["c0", "c1"]
    lines = [f"concept {cid}" for cid in hier + eqv + plain + conds]

    def ctx_suffix() -> str:
        choice = rng.choice((None, None, None, "c0", "c0+c1"))
        return f" @ {choice}" if choice else ""

    for j in range(1, len(hier)):
        for i in range(j):
            if rng.random() < 0.35:
                lines.append(f"ako {hier[i]} {hier[j]}{ctx_suffix()}")
            if rng.random() < 0.15:
                lines.append(f"partof {hier[i]} {hier[j]}{ctx_suffix()}")
    for i in range(1, len(eqv)):
        if rng.random() < 0.7:
            lines.append(f"eqv {eqv[i - 1]} {eqv[i]}{ctx_suffix()}")
    for cid in eqv:
        if rng.random() < 0.4:
            lines.append(f"ako {cid} {rng.choice(hier)}{ctx_suffix()}")

    if rng.random() < 0.7:
        owner = rng.choice(hier)
        lines.append("concept grade")
        lines.append(f"property {owner}.grade")
        values = sorted(rng.sample(plain + conds, k=2))
        lines.append(f"value {owner}.grade = {','.join(values)}")

    seen_links: set[str] = set()
    for _ in range(rng.randint(0, max_links)):
        anchor = rng.choice(plain)
        other = rng.choice(hier + eqv + plain)
        if other == anchor:
            continue
        source, target = (anchor, other) if rng.random() < 0.5 else (other, anchor)
        sign = rng.choice("+-?")
        prec = rng.choice(("known", "unknown"))
        sig = round(rng.random(), 2)
        line = f"link {source} -> {target} sign={sign} prec={prec} sig={sig}{ctx_suffix()}"
        if line not in seen_links:
            seen_links.add(line)
            lines.append(line)
    return "\n".join(lines) + "\n"
