"""Command-line interface.

Exit codes: 0 success (including negative or empty query answers), 2 usage
errors, 3 knowledge-base or case errors, 4 model errors. Results go to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .errors import EngineError, ModelError
from .interactions import InteractionKind
from .kb import UNIVERSAL, CategorizerKind, Context, KnowledgeBase
from .kbfile import parse_kb
from .planner import (
    CATEGORY_ROOTS,
    BackgroundTable,
    characterize_background,
    establish_context,
    formulate_problem,
    parse_case,
)
from .qpn import (
    construct_model,
    evaluate_model,
    excluded_associations,
    export_dot,
    parse_qpn,
    serialize_qpn,
)
from .queries import interaction_neighbors, interacts, is_related, related_concepts

_CATEGORIZERS = {kind.value: kind for kind in CategorizerKind}
_INTERACTIONS = {kind.value: kind for kind in InteractionKind}


def _load_kb(path: str) -> KnowledgeBase:
    with open(path, encoding="utf-8") as handle:
        return parse_kb(handle.read())


def _usage_error(parser: argparse.ArgumentParser, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    parser.print_usage(sys.stderr)
    return 2


def cmd_check(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    kb = _load_kb(args.kb)
    print(
        f"ok: {len(kb.concepts)} concepts, {len(kb.categorical)} categorical assertions, "
        f"{len(kb.interactions)} interactions"
    )
    return 0


def cmd_query(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    kb = _load_kb(args.kb)
    active = Context.parse(args.ctx) if args.ctx else UNIVERSAL
    rel = args.rel
    if args.type in ("q1", "q2"):
        if rel not in _CATEGORIZERS:
            return _usage_error(parser, f"--rel must be a categorizer (ako|partof|eqv) for {args.type}")
        kind = _CATEGORIZERS[rel]
        if args.type == "q1":
            if args.b is None:
                return _usage_error(parser, "q1 needs --a and --b")
            answer = is_related(kb, active, args.a, args.b, kind)
        else:
            answer = related_concepts(kb, active, args.a, kind, args.direction)
    elif args.type in ("q3", "q4"):
        if rel not in _INTERACTIONS:
            return _usage_error(parser, f"--rel must be an interaction kind for {args.type}")
        kind = _INTERACTIONS[rel]
        if args.type == "q3":
            answer = interaction_neighbors(kb, active, args.a, kind)
        else:
            if args.b is None:
                return _usage_error(parser, "q4 needs --a and --b")
            answer = interacts(kb, active, args.a, args.b, kind)
    else:  # pragma: no cover - argparse choices guard this
        return _usage_error(parser, f"unknown query type {args.type!r}")
    for line in answer.render():
        print(line)
    return 0


def _render_background(table: BackgroundTable) -> list[str]:
    lines = ["background:"]
    for root in CATEGORY_ROOTS:
        members = ", ".join(table.categories[root]) or "-"
        lines.append(f"  {root}: {members}")
    lines.append(f"  unclassified: {', '.join(table.unclassified) or '-'}")
    return lines


def cmd_formulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    kb = _load_kb(args.kb)
    with open(args.case, encoding="utf-8") as handle:
        case = parse_case(handle.read(), kb)
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, case.conditions)
    formulation = formulate_problem(
        kb, ctx, table, case.criterion, args.depth, args.tau
    )
    model = construct_model(kb, formulation, ctx)

    for warning in table.warnings + list(formulation.warnings):
        print(f"warning: {warning}", file=sys.stderr)

    lines = _render_background(table)
    lines.append(f"context: {ctx.as_context.name}")
    lines.append(f"criterion: {formulation.criterion}")
    roles = formulation.roles
    lines.append(f"concepts ({len(roles)}):")
    lines.extend(f"  {cid} [{roles[cid]}]" for cid in sorted(roles))
    lines.append(f"assertions ({len(formulation.selected)}):")
    lines.extend(f"  {assertion.render()}" for assertion in formulation.selected)
    left_out = excluded_associations(formulation)
    if left_out:
        lines.append(f"excluded associations ({len(left_out)}):")
        lines.extend(f"  {assertion.render()}" for assertion in left_out)
    lines.append(f"model: {len(model.nodes)} nodes, {len(model.edges)} edges -> {args.out}")
    print("\n".join(lines))

    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(serialize_qpn(model))
    return 0


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    with open(args.model, encoding="utf-8") as handle:
        model = parse_qpn(handle.read())
    for line in evaluate_model(model).render():
        print(line)
    return 0


def cmd_export(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    with open(args.model, encoding="utf-8") as handle:
        model = parse_qpn(handle.read())
    print(export_dot(model), end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmkit",
        description="Query a context-sensitive knowledge base and formulate qualitative decision models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="validate a knowledge-base file")
    check.add_argument("--kb", required=True, help="knowledge-base file")
    check.set_defaults(func=cmd_check)

    query = sub.add_parser("query", help="answer one query with its trace")
    query.add_argument("--kb", required=True)
    query.add_argument("--type", required=True, choices=("q1", "q2", "q3", "q4"))
    query.add_argument("--a", required=True, help="subject concept")
    query.add_argument("--b", help="object concept (q1, q4)")
    query.add_argument("--rel", required=True, help="categorizer or interaction kind")
    query.add_argument("--ctx", help="active context as c1+c2+...")
    query.add_argument("--direction", choices=("up", "down"), default="down", help="q2 walk direction")
    query.set_defaults(func=cmd_query)

    formulate = sub.add_parser("formulate", help="formulate a decision model from a case")
    formulate.add_argument("--kb", required=True)
    formulate.add_argument("--case", required=True, help="case-description file")
    formulate.add_argument("--out", default="model.qpn", help="model file to write")
    formulate.add_argument("--depth", type=int, default=3, help="interaction hop bound")
    formulate.add_argument("--tau", type=float, default=0.0, help="significance threshold")
    formulate.set_defaults(func=cmd_formulate)

    evaluate = sub.add_parser("evaluate", help="judge each decision against the criterion")
    evaluate.add_argument("--model", required=True, help="model file")
    evaluate.set_defaults(func=cmd_evaluate)

    export = sub.add_parser("export", help="write a model as Graphviz text")
    export.add_argument("--model", required=True, help="model file")
    export.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ModelError as error:
        print(f"error: {error}", file=sys.stderr)
        return 4
    except (EngineError, OSError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
