"""``fairpool`` command-line interface.

Exit codes: 0 ok/fair, 1 validation error, 2 unfair, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from fairpool import bench as bench_mod
from fairpool.causal_core import ModelError
from fairpool.documents import (
    DocumentError,
    DocumentIOError,
    ModelDocument,
    check_consistency,
    diagram_from_report,
    dumps,
    is_report,
    lemma1_to_json,
    load_document,
    load_json,
    parse_document,
    probability_to_json,
    report_to_json,
    to_dot,
    verdict_to_json,
)
from fairpool.fair_pooling import Algorithm, run_algorithm
from fairpool.fairness import (
    FairnessPartition,
    PartitionError,
    check_fair_bruteforce,
    check_fair_lemma1,
)
from fairpool.judgment_aggregation import AggregationError, AggregationRule, TieBreak
from fairpool.opinion_pooling import PoolingError, pool_root_distributions, validate_weights

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNFAIR = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for "unfair"
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    algorithm: Algorithm
    rule: AggregationRule
    tie_break: TieBreak
    seed: int | None
    protected: tuple[str, ...]
    weights: tuple[float, ...] | None = None


def _split_names(values: Sequence[str] | None) -> tuple[str, ...]:
    names: list[str] = []
    for value in values or ():
        names.extend(part.strip() for part in value.split(",") if part.strip())
    return tuple(dict.fromkeys(names))


def _parse_weights(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"invalid weights: {text!r}") from None


def _build_rule(args: argparse.Namespace, weights: tuple[float, ...] | None) -> AggregationRule:
    kind = args.rule
    if kind == "quota":
        if args.threshold is None:
            raise UsageError("--rule quota needs --threshold")
        return AggregationRule.quota(args.threshold)
    if kind == "weighted-majority":
        if weights is None:
            raise UsageError("--rule weighted-majority needs --weights")
        return AggregationRule.weighted_majority(weights)
    if kind == "unanimity":
        return AggregationRule.unanimity()
    return AggregationRule.strict_majority()


def _emit(text: str, stream=None) -> None:
    (stream or sys.stdout).write(text)


def _fail(code: int, messages: Sequence[str]) -> int:
    for m in messages:
        print(m, file=sys.stderr)
    return code


def _load_all(paths: Sequence[str]) -> list[ModelDocument]:
    return [load_document(p) for p in paths]


# -- commands -------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    docs = []
    errors: list[str] = []
    for path in args.files:
        try:
            docs.append(load_document(path))
        except DocumentIOError as exc:
            return _fail(EXIT_IO, [str(exc)])
        except DocumentError as exc:
            errors.extend(exc.violations)
    if not errors:
        errors = check_consistency(docs)
    result = {
        "valid": not errors,
        "files": list(args.files),
        "errors": errors,
    }
    _emit(dumps(result))
    return EXIT_OK if not errors else EXIT_INVALID


def _surviving_roots(docs: Sequence[ModelDocument], surviving: frozenset[str]) -> list[str]:
    roots = set()
    for doc in docs:
        for s, t in doc.edges:
            if s in doc.exogenous and t in surviving:
                roots.add(s)
    return sorted(roots)


def cmd_pool(args: argparse.Namespace) -> int:
    try:
        docs = _load_all(args.files)
    except DocumentIOError as exc:
        return _fail(EXIT_IO, [str(exc)])
    except DocumentError as exc:
        return _fail(EXIT_INVALID, exc.violations)
    problems = check_consistency(docs)
    if problems:
        return _fail(EXIT_INVALID, problems)
    try:
        weights = _parse_weights(args.weights)
        config = RunConfig(
            algorithm=Algorithm(args.algorithm),
            rule=_build_rule(args, weights),
            tie_break=TieBreak(args.tie_break),
            seed=args.seed if args.tie_break == TieBreak.RANDOM.value else None,
            protected=_split_names(args.protected),
            weights=weights,
        )
        if not config.protected:
            raise UsageError("--protected must name at least one variable")
        if config.weights is not None and len(config.weights) != len(docs):
            raise UsageError(f"{len(config.weights)} weights given for {len(docs)} experts")
        partition = FairnessPartition.from_protected(
            docs[0].endogenous, docs[0].predictor, config.protected
        )
        report = run_algorithm(
            config.algorithm,
            [d.diagram() for d in docs],
            partition,
            config.rule,
            config.tie_break,
            config.seed,
        )
        out = report_to_json(
            report, config.rule.describe(), config.tie_break.value, config.seed, list(args.files)
        )
        if args.with_distributions:
            models = [d.to_model() for d in docs]
            pooled = pool_root_distributions(models, validate_weights(weights) if weights else None)
            keep = _surviving_roots(docs, report.pooled_diagram.vertices)
            out["pooled_distributions"] = {
                u: [probability_to_json(p) for p in pooled[u]] for u in keep
            }
    except (UsageError, PartitionError, AggregationError, PoolingError, ModelError, ValueError) as exc:
        return _fail(EXIT_INVALID, [f"error: {exc}"])

    dot_text = None
    if args.dot:
        dot_text = to_dot(
            report.pooled_diagram,
            partition.predictor,
            partition.protected,
            report.removed_vertices,
            name=f"pooled-{config.algorithm.value}",
        )
        try:
            Path(args.dot).write_text(dot_text, encoding="utf-8")
        except OSError as exc:
            return _fail(EXIT_IO, [f"{args.dot}: {exc.strerror or exc}"])
    _emit(dumps(out))
    return EXIT_OK


def cmd_check_fair(args: argparse.Namespace) -> int:
    try:
        obj = load_json(args.file)
    except DocumentIOError as exc:
        return _fail(EXIT_IO, [str(exc)])
    protected = _split_names(args.protected)
    doc = None
    try:
        if is_report(obj):
            diagram, predictor = diagram_from_report(obj)
            protected = protected or tuple(obj.get("protected", ()))
            if args.brute_force:
                raise UsageError("a pooling report has no structural equations; --brute-force needs a model document")
        else:
            doc = parse_document(obj, args.file)
            diagram, predictor = doc.diagram(), doc.predictor
        if not protected:
            raise UsageError("--protected must name at least one variable")
        partition = FairnessPartition.from_protected(diagram.endogenous, predictor, protected)
        lemma = check_fair_lemma1(diagram, partition)
        result = {
            "file": args.file,
            "predictor": predictor,
            "protected": sorted(partition.protected),
            "lemma1": lemma1_to_json(lemma),
        }
        fair = lemma.holds
        if args.brute_force:
            if not doc.has_equations:
                raise UsageError("--brute-force needs structural equations in the document")
            verdict = check_fair_bruteforce(doc.to_model(), partition)
            result["brute_force"] = verdict_to_json(verdict)
            fair = verdict.fair
        result["fair"] = fair
    except DocumentError as exc:
        return _fail(EXIT_INVALID, exc.violations)
    except (UsageError, PartitionError, ModelError) as exc:
        return _fail(EXIT_INVALID, [f"error: {exc}"])
    _emit(dumps(result))
    return EXIT_OK if fair else EXIT_UNFAIR


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        weights = _parse_weights(args.weights)
        rule = _build_rule(args, weights)
        results = bench_mod.run_bench(
            args.experts, args.vars, args.edge_prob, args.trials, args.seed, rule
        )
    except (UsageError, AggregationError, ValueError) as exc:
        return _fail(EXIT_INVALID, [f"error: {exc}"])
    text = bench_mod.to_csv(results)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            return _fail(EXIT_IO, [f"{args.output}: {exc.strerror or exc}"])
    else:
        _emit(text)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    try:
        obj = load_json(args.file)
    except DocumentIOError as exc:
        return _fail(EXIT_IO, [str(exc)])
    try:
        if is_report(obj):
            diagram, predictor = diagram_from_report(obj)
            removed = obj.get("removed_vertices", [])
            diagram = diagram.subgraph(set(diagram.vertices) - set(removed))
            protected = _split_names(args.protected) or tuple(obj.get("protected", ()))
        else:
            doc = parse_document(obj, args.file)
            diagram, predictor, removed = doc.diagram(), doc.predictor, []
            protected = _split_names(args.protected)
    except DocumentError as exc:
        return _fail(EXIT_INVALID, exc.violations)
    text = to_dot(diagram, predictor, protected, removed, name=Path(args.file).stem)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            return _fail(EXIT_IO, [f"{args.output}: {exc.strerror or exc}"])
    else:
        _emit(text)
    return EXIT_OK


def _add_rule_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--rule",
        choices=["strict-majority", "quota", "unanimity", "weighted-majority"],
        default="strict-majority",
    )
    p.add_argument("--threshold", type=float, help="quota threshold in (0, 1]")
    p.add_argument("--weights", help="comma-separated expert weights summing to 1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairpool", description="Fair pooling of expert causal models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="validate model documents and their mutual consistency")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pool", help="pool expert models into a counterfactually fair diagram")
    p.add_argument("files", nargs="+")
    p.add_argument(
        "--algorithm", choices=[a.value for a in Algorithm], default=Algorithm.POOLING_REMOVAL.value
    )
    _add_rule_args(p)
    p.add_argument("--protected", action="append", required=True)
    p.add_argument("--tie-break", choices=[t.value for t in TieBreak], default="alphabetical")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dot", help="also write the pooled diagram as Graphviz DOT to this path")
    p.add_argument("--with-distributions", action="store_true")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("check-fair", help="check counterfactual fairness of a model or pooling report")
    p.add_argument("file")
    p.add_argument("--protected", action="append")
    p.add_argument("--brute-force", action="store_true")
    p.set_defaults(func=cmd_check_fair)

    p = sub.add_parser("bench", help="Monte-Carlo comparison of the two algorithms (CSV)")
    p.add_argument("--experts", type=int, default=3)
    p.add_argument("--vars", type=int, default=7)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_rule_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="export a model document or pooling report as DOT")
    p.add_argument("file")
    p.add_argument("--protected", action="append")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
