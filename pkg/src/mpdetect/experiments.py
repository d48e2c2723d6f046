"""Experiment pipelines behind the CLI: evaluation tables, selectivity
tables and the two-family theorem run."""

from __future__ import annotations

import logging
from dataclasses import replace
from itertools import combinations
from typing import Sequence

from . import preorder
from .config import ExperimentConfig
from .errors import ParameterError
from .evaluate import (
    EvalReport,
    Outcome,
    SelectivityReport,
    compare_from_evidence,
    estimate,
    estimate_selectivity,
    pdet_curve,
    pdet_reports,
)
from .model import SignalScenario, interference_from_descriptor, worst_case_interference
from .rules import AlwaysOne, AlwaysZero, DecisionRule, Oracle, np_build, rdt_build, rule_n

log = logging.getLogger(__name__)

CSV_HEADER = (
    "rule_id", "family", "n", "gamma", "tau", "q", "interference",
    "epsilon", "trials", "positives", "p_hat", "ci_lo", "ci_hi", "seed",
)


def fmt_real(x: float | None) -> str:
    return "" if x is None else f"{x:.12g}"


def build_family(config: ExperimentConfig, family: str) -> list[DecisionRule]:
    if family == "np":
        return [np_build(n, config.gamma) for n in config.n_list]
    if family == "rdt":
        return [rdt_build(n, config.gamma, config.tau) for n in config.n_list]
    if family == "oracle":
        return [Oracle(config.gamma)]
    if family == "always_zero":
        return [AlwaysZero()]
    if family == "always_one":
        return [AlwaysOne()]
    raise ParameterError(f"unknown family {family!r}")


def _rule_sizes(config: ExperimentConfig, rule: DecisionRule) -> list[int]:
    n = rule_n(rule)
    return [n] if n is not None else list(config.n_list)


def report_row(rule: DecisionRule, report: EvalReport, gamma: float) -> dict[str, str]:
    return {
        "rule_id": rule.id,
        "family": rule.family,
        "n": str(report.n),
        "gamma": fmt_real(gamma),
        "tau": fmt_real(getattr(rule, "tau", None)),
        "q": fmt_real(report.q),
        "interference": report.interference_id,
        "epsilon": str(report.epsilon),
        "trials": str(report.trials),
        "positives": str(report.positives),
        "p_hat": fmt_real(report.p_hat),
        "ci_lo": fmt_real(report.ci_lo),
        "ci_hi": fmt_real(report.ci_hi),
        "seed": str(report.seed),
    }


def _row_key(row: dict[str, str]) -> tuple:
    return (
        row["rule_id"], row["family"], int(row["n"]), float(row["gamma"]),
        float(row["tau"] or -1), float(row["q"]), row["interference"], int(row["epsilon"]),
    )


def sort_rows(rows: list[dict[str, str]]) -> list[dict[str, str]]:
    return sorted(rows, key=_row_key)


def evaluate_rows(config: ExperimentConfig, families: Sequence[str]) -> list[dict[str, str]]:
    """One row per (rule, n, q, interference, epsilon)."""
    rows = []
    for family in families:
        for rule in build_family(config, family):
            for n in _rule_sizes(config, rule):
                for q in config.q_grid:
                    for d in config.stress_suite:
                        for eps in (0, 1):
                            scenario = SignalScenario(n, eps, interference_from_descriptor(d, q))
                            rep = estimate(rule, scenario, config.trials, config.seed, config.conf)
                            rows.append(report_row(rule, rep, config.gamma))
    return sort_rows(rows)


def selectivity_rows(
    config: ExperimentConfig, families: Sequence[str]
) -> tuple[list[dict[str, str]], list[SelectivityReport]]:
    rows, reports = [], []
    for family in families:
        for rule in build_family(config, family):
            for n in _rule_sizes(config, rule):
                sel = estimate_selectivity(
                    rule, config.gamma, config.q_grid, config.stress_suite,
                    config.trials, config.seed, config.conf, config.slack, n=n,
                )
                reports.append(sel)
                for q, verdict, reps, worst in zip(sel.q_grid, sel.verdicts, sel.reports, sel.closed_form_worst_pfa):
                    for rep in reps:
                        row = report_row(rule, rep, config.gamma)
                        row["verdict"] = verdict.value
                        row["closed_form_worst_pfa"] = fmt_real(worst)
                        rows.append(row)
    return sort_rows(rows), reports


def _sel_dict(sel: SelectivityReport) -> dict:
    return {
        "rule_id": sel.rule_id,
        "q_grid": list(sel.q_grid),
        "verdicts": [v.value for v in sel.verdicts],
        "closed_form_worst_pfa": list(sel.closed_form_worst_pfa),
        "max_pfa_upper_ci": [max(r.ci_hi for r in reps) for reps in sel.reports],
    }


def _report_dict(rep: EvalReport) -> dict:
    return {
        "rule_id": rep.rule_id, "n": rep.n, "q": rep.q, "interference": rep.interference_id,
        "epsilon": rep.epsilon, "trials": rep.trials, "positives": rep.positives,
        "p_hat": rep.p_hat, "ci_lo": rep.ci_lo, "ci_hi": rep.ci_hi,
    }


def run_theorem(config: ExperimentConfig) -> dict:
    """Compare the NP and RDT families pairwise, build the empirical
    preorder, and check both the strict MP condition and the truncated
    family diagnostic.

    Claim values are ``True``/``False`` or ``"UNDECIDED"`` when the Monte
    Carlo evidence cannot separate the confidence intervals.
    """
    if not {"np", "rdt"} <= set(config.families):
        raise ParameterError("theorem mode requires two families: np and rdt")
    if config.tau >= 0.5:
        raise ParameterError("theorem mode evaluates detection at q = tau and needs tau < 1/2")
    np_family = build_family(config, "np")
    rdt_family = build_family(config, "rdt")
    oracle = Oracle(config.gamma)
    rules = np_family + rdt_family
    ids = [r.id for r in rules] + [oracle.id]

    sel = {}
    pdet = {}
    for rule in rules:
        log.info("evaluating %s", rule.id)
        s = estimate_selectivity(
            rule, config.gamma, config.q_grid, config.stress_suite,
            config.trials, config.seed, config.conf, config.slack,
        )
        sel[rule.id] = s
        pdet[rule.id] = pdet_reports(rule, s.in_set, config.stress_suite, config.trials, config.seed, config.conf)

    verdicts = []
    for f, g in combinations(rules, 2):
        verdicts.append(compare_from_evidence(f, g, sel[f.id], sel[g.id], pdet[f.id], pdet[g.id]))
    for f in rules:
        verdicts.append(compare_from_evidence(f, oracle, None, None, None, None))

    P = preorder.build_empirical(ids, verdicts, oracle.id)
    A, B = [r.id for r in np_family], [r.id for r in rdt_family]
    strict = preorder.mp_verify(P, A, B)

    curves = {
        "np": pdet_curve(np_family, SignalScenario(1, 1), config.trials, config.seed, config.conf),
        "rdt": pdet_curve(
            rdt_family, SignalScenario(1, 1, worst_case_interference(config.tau)),
            config.trials, config.seed, config.conf,
        ),
    }
    diag = preorder.truncated_family_mp_diagnostic(P, A, B, [oracle.id], curves)

    cross = [v for v in verdicts if (v.pair[0] in A and v.pair[1] in B) or (v.pair[0] in B and v.pair[1] in A)]
    if all(v.outcome is Outcome.INCOMPARABLE for v in cross):
        incomparable: bool | str = True
    elif any(v.outcome in (Outcome.LEFT_BELOW, Outcome.RIGHT_BELOW, Outcome.EQUIVALENT) for v in cross):
        incomparable = False
    else:
        incomparable = "UNDECIDED"

    undecided = [v for v in verdicts if v.outcome is Outcome.UNDECIDED]
    claims = {
        "incomparable": incomparable,
        "strict_mp_on_truncation": strict.holds,
        "strict_mp_failing_condition": strict.failing_condition,
        "limit_diagnostic": diag.verdict,
        "undecided_comparisons": len(undecided),
    }
    return {
        "claims": claims,
        "reports": {
            "selectivity": [_sel_dict(s) for s in sel.values()],
            "comparisons": [
                {"pair": list(v.pair), "outcome": v.outcome.value, "note": v.note} for v in verdicts
            ],
            "preorder": preorder.dumps(P),
            "preorder_notes": list(P.notes),
            "strict_mp": {
                "A": A,
                "B": B,
                "holds": strict.holds,
                "failing_condition": strict.failing_condition,
                "detail": strict.failing_detail,
            },
            "limit_diagnostic": {
                "external_upper_bounds_np": sorted(diag.external_bounds_a),
                "external_upper_bounds_rdt": sorted(diag.external_bounds_b),
                "external_bounds_equal": diag.external_bounds_equal,
                "no_cross_family_bounds": diag.no_cross_bounds,
                "growth": diag.growth,
                "verdict": diag.verdict,
            },
            "pdet_curves": {name: [_report_dict(r) for r in curve] for name, curve in curves.items()},
        },
        "config_echo": config.to_dict(),
        "seed": config.seed,
    }


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    kept = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **kept) if kept else config
