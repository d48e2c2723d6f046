"""Command-line entry point.

Exit codes: 0 success, 1 MP condition fails, 2 input error, 3 numerical
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import preorder
from .config import FAMILIES, ExperimentConfig, load_config
from .errors import NumericalError, ParameterError
from .experiments import CSV_HEADER, evaluate_rows, run_theorem, selectivity_rows, with_overrides

EXIT_OK, EXIT_MP_FAILS, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("mpdetect")


def _csv_text(rows: list[dict[str, str]], header: tuple[str, ...]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None, config: ExperimentConfig, default_name: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(out) if out else Path(config.output_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}", file=sys.stderr)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    return with_overrides(
        config,
        seed=args.seed,
        tau=getattr(args, "tau", None),
        trials=args.trials,
        output_dir=args.output_dir,
    )


def _families(args: argparse.Namespace, default: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(args.family) if args.family else default


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config(args)
    rows = evaluate_rows(config, _families(args, config.families))
    _emit(_csv_text(rows, CSV_HEADER), args.out, config, "evaluate.csv")
    return EXIT_OK


def cmd_selectivity(args: argparse.Namespace) -> int:
    config = _config(args)
    rows, reports = selectivity_rows(config, _families(args, config.families + ("always_zero",)))
    _emit(_csv_text(rows, CSV_HEADER + ("verdict", "closed_form_worst_pfa")), args.out, config, "selectivity.csv")
    for sel in reports:
        cells = " ".join(f"q={q:g}:{v.value}" for q, v in zip(sel.q_grid, sel.verdicts))
        print(f"{sel.rule_id}: {cells}", file=sys.stderr)
    return EXIT_OK


def cmd_theorem(args: argparse.Namespace) -> int:
    config = _config(args)
    report = run_theorem(config)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out, config, "theorem.json")
    claims = report["claims"]
    if claims["incomparable"] == "UNDECIDED" or claims["undecided_comparisons"]:
        print("warning: some comparisons are UNDECIDED; increase trials to separate intervals", file=sys.stderr)
    for key in ("incomparable", "strict_mp_on_truncation", "strict_mp_failing_condition", "limit_diagnostic"):
        print(f"{key}: {claims[key]}", file=sys.stderr)
    return EXIT_OK


def _id_list(text: str) -> list[str]:
    ids = [x.strip() for x in text.split(",") if x.strip()]
    if not ids:
        raise ParameterError("empty element list")
    return ids


def cmd_mp(args: argparse.Namespace) -> int:
    try:
        text = Path(args.preorder).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParameterError(f"cannot read {args.preorder}: {exc}") from None
    P = preorder.loads(text)
    A, B = _id_list(args.A), _id_list(args.B)
    if set(A) & set(B):
        raise ParameterError(f"A and B overlap on {sorted(set(A) & set(B))}")
    result = preorder.mp_verify(P, A, B)
    if result.holds:
        print(f"holds: witness a={result.cond_a_witness} b={result.cond_b_witness}")
        return EXIT_OK
    print(f"fails: {result.failing_detail}")
    return EXIT_MP_FAILS


def cmd_config(args: argparse.Namespace) -> int:
    sys.stdout.write(ExperimentConfig().dumps())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpdetect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name: str, func, help_text: str, families: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON experiment config (built-in default when omitted)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--trials", type=int, help="override the config trial count")
        p.add_argument("--output-dir", help="override the config output directory")
        p.add_argument("--out", help="output file, '-' for stdout")
        if families:
            p.add_argument("--family", action="append", choices=FAMILIES)
            p.add_argument("--tau", type=float, help="override the RDT tolerance")
        p.set_defaults(func=func)
        return p

    experiment("evaluate", cmd_evaluate, "Monte Carlo PFA/PDET table")
    experiment("selectivity", cmd_selectivity, "per-q selectivity verdicts")
    theorem = experiment("theorem", cmd_theorem, "two-family comparison and MP checks", families=False)
    theorem.add_argument("--tau", type=float, help="override the RDT tolerance")

    mp = sub.add_parser("mp", help="check the MP condition on a preorder file")
    mp.add_argument("preorder", help="edge-list preorder file")
    mp.add_argument("--A", required=True, help="comma-separated element ids")
    mp.add_argument("--B", required=True, help="comma-separated element ids")
    mp.set_defaults(func=cmd_mp)

    cfg = sub.add_parser("config", help="print the default config")
    cfg.set_defaults(func=cmd_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
