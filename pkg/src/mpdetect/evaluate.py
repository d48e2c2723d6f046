"""Monte Carlo estimation of false-alarm / detection rates, empirical
selectivity over a grid of interference bounds, and pairwise comparison of
rules under the selectivity-then-power preorder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import ParameterError
from .model import SignalScenario, interference_from_descriptor, iter_blocks, worst_case_interference
from .numerics import gaussian_quantile
from .rules import DecisionRule, Oracle, closed_form_rate, decide_batch, rule_gamma, rule_n

DEFAULT_CONF = 0.99
DEFAULT_SLACK = 0.005
DEFAULT_SUITE = ("constant+", "constant-", "uniform", "rademacher", "clipped_gaussian:0.25")


def wilson_interval(positives: int, trials: int, conf: float = DEFAULT_CONF) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not 0 <= positives <= trials:
        raise ParameterError(f"positives={positives} outside [0, {trials}]")
    if not 0 < conf < 1:
        raise ParameterError(f"conf must lie in (0, 1), got {conf}")
    z = gaussian_quantile(0.5 + conf / 2.0)
    p = positives / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    lo, hi = max(0.0, center - half), min(1.0, center + half)
    # keep lo <= p_hat <= hi exactly at the boundaries
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class EvalReport:
    rule_id: str
    interference_id: str
    q: float
    epsilon: int
    trials: int
    positives: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    seed: int
    n: int
    conf: float = DEFAULT_CONF


class Verdict(str, Enum):
    IN = "IN"
    OUT = "OUT"
    UNDECIDED = "UNDECIDED"


class Outcome(str, Enum):
    LEFT_BELOW = "LEFT_BELOW"
    RIGHT_BELOW = "RIGHT_BELOW"
    EQUIVALENT = "EQUIVALENT"
    INCOMPARABLE = "INCOMPARABLE"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class SelectivityReport:
    rule_id: str
    gamma: float
    q_grid: tuple[float, ...]
    verdicts: tuple[Verdict, ...]
    reports: tuple[tuple[EvalReport, ...], ...]
    # exact worst-case false-alarm rate at each q, when a closed form exists
    closed_form_worst_pfa: tuple[float | None, ...]
    slack: float = DEFAULT_SLACK

    def verdict_at(self, q: float) -> Verdict:
        return self.verdicts[self.q_grid.index(q)]

    @property
    def in_set(self) -> tuple[float, ...]:
        return tuple(q for q, v in zip(self.q_grid, self.verdicts) if v is Verdict.IN)


@dataclass(frozen=True)
class ComparisonVerdict:
    pair: tuple[str, str]
    outcome: Outcome
    selectivity: tuple[SelectivityReport | None, SelectivityReport | None] = (None, None)
    pdet: tuple[tuple[EvalReport, EvalReport], ...] = ()
    note: str = ""


def _scenario_n(rule: DecisionRule, scenario: SignalScenario) -> None:
    n = rule_n(rule)
    if n is not None and n != scenario.n:
        raise ParameterError(f"rule {rule.id} expects n={n}, scenario has n={scenario.n}")


def estimate(
    rule: DecisionRule,
    scenario: SignalScenario,
    trials: int,
    seed: int,
    conf: float = DEFAULT_CONF,
) -> EvalReport:
    """Fraction of ``trials`` simulated observations on which ``rule`` decides 1."""
    _scenario_n(rule, scenario)
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    positives = 0
    for _, data, aux in iter_blocks(scenario, trials, seed):
        positives += int(decide_batch(rule, data, scenario.epsilon, aux).sum())
    lo, hi = wilson_interval(positives, trials, conf)
    return EvalReport(
        rule_id=rule.id,
        interference_id=scenario.interference.id,
        q=scenario.q,
        epsilon=scenario.epsilon,
        trials=trials,
        positives=positives,
        p_hat=positives / trials,
        ci_lo=lo,
        ci_hi=hi,
        seed=int(seed),
        n=scenario.n,
        conf=conf,
    )


def _validate_grid(q_grid: Sequence[float]) -> tuple[float, ...]:
    if not q_grid:
        raise ParameterError("q_grid must be nonempty")
    grid = tuple(float(q) for q in q_grid)
    if any(not 0 <= q < 0.5 for q in grid):
        raise ParameterError(f"q_grid values must lie in [0, 1/2), got {grid}")
    if list(grid) != sorted(set(grid)):
        raise ParameterError("q_grid must be strictly ascending")
    return grid


def _validate_suite(stress_suite: Sequence[str]) -> tuple[str, ...]:
    if not stress_suite:
        raise ParameterError("stress_suite must be nonempty")
    suite = tuple(stress_suite)
    if not any(interference_from_descriptor(d, 0.25) == worst_case_interference(0.25) for d in suite):
        raise ParameterError("stress_suite must contain the worst case 'constant+'")
    return suite


def _eval_n(rule: DecisionRule, n: int | None) -> int:
    rn = rule_n(rule)
    if rn is not None:
        return rn
    return n if n is not None else 1


def estimate_selectivity(
    rule: DecisionRule,
    gamma: float,
    q_grid: Sequence[float],
    stress_suite: Sequence[str] = DEFAULT_SUITE,
    trials: int = 100_000,
    seed: int = 0,
    conf: float = DEFAULT_CONF,
    slack: float = DEFAULT_SLACK,
    n: int | None = None,
) -> SelectivityReport:
    """Three-valued membership of each grid bound in the rule's selectivity.

    IN when every stress law keeps the upper confidence bound on the
    false-alarm rate within ``gamma + slack``; OUT when some law pushes the
    lower bound above ``gamma``; UNDECIDED otherwise.
    """
    grid = _validate_grid(q_grid)
    suite = _validate_suite(stress_suite)
    size = _eval_n(rule, n)
    verdicts, reports, closed = [], [], []
    for q in grid:
        row = tuple(
            estimate(rule, SignalScenario(size, 0, interference_from_descriptor(d, q)), trials, seed, conf)
            for d in suite
        )
        if all(r.ci_hi <= gamma + slack for r in row):
            verdict = Verdict.IN
        elif any(r.ci_lo > gamma for r in row):
            verdict = Verdict.OUT
        else:
            verdict = Verdict.UNDECIDED
        verdicts.append(verdict)
        reports.append(row)
        closed.append(closed_form_rate(rule, 0, worst_case_interference(q).c))
    return SelectivityReport(
        rule_id=rule.id,
        gamma=gamma,
        q_grid=grid,
        verdicts=tuple(verdicts),
        reports=tuple(reports),
        closed_form_worst_pfa=tuple(closed),
        slack=slack,
    )


def pdet_reports(
    rule: DecisionRule,
    q_values: Sequence[float],
    stress_suite: Sequence[str],
    trials: int,
    seed: int,
    conf: float = DEFAULT_CONF,
    n: int | None = None,
) -> dict[tuple[float, str], EvalReport]:
    """Detection-rate estimates keyed by ``(q, interference descriptor)``."""
    size = _eval_n(rule, n)
    return {
        (q, d): estimate(rule, SignalScenario(size, 1, interference_from_descriptor(d, q)), trials, seed, conf)
        for q in q_values
        for d in stress_suite
    }


def _is_oracle(rule: DecisionRule) -> bool:
    return isinstance(rule, Oracle)


def compare_from_evidence(
    rule_f: DecisionRule,
    rule_g: DecisionRule,
    sel_f: SelectivityReport | None,
    sel_g: SelectivityReport | None,
    pdet_f: dict[tuple[float, str], EvalReport] | None,
    pdet_g: dict[tuple[float, str], EvalReport] | None,
) -> ComparisonVerdict:
    """Decide the preorder relation from precomputed evidence.

    ``pdet_f`` / ``pdet_g`` must cover every ``(q, law)`` cell with ``q`` in
    the common IN set.
    """
    pair = (rule_f.id, rule_g.id)
    if _is_oracle(rule_f) or _is_oracle(rule_g):
        if _is_oracle(rule_f) and _is_oracle(rule_g):
            outcome = Outcome.EQUIVALENT
        elif _is_oracle(rule_g):
            outcome = Outcome.LEFT_BELOW
        else:
            outcome = Outcome.RIGHT_BELOW
        return ComparisonVerdict(pair, outcome, note="oracle dominates every test")

    assert sel_f is not None and sel_g is not None
    if sel_f.q_grid != sel_g.q_grid:
        raise ParameterError("selectivity reports use different grids")
    sel = (sel_f, sel_g)
    conflicts = [
        q
        for q, a, b in zip(sel_f.q_grid, sel_f.verdicts, sel_g.verdicts)
        if {a, b} == {Verdict.IN, Verdict.OUT}
    ]
    if conflicts:
        return ComparisonVerdict(pair, Outcome.INCOMPARABLE, sel, note=f"selectivity differs at q={conflicts}")
    if Verdict.UNDECIDED in sel_f.verdicts + sel_g.verdicts:
        return ComparisonVerdict(pair, Outcome.UNDECIDED, sel, note="selectivity not resolved on the grid")

    common = set(sel_f.in_set)
    assert pdet_f is not None and pdet_g is not None
    cells = sorted(k for k in pdet_f if k[0] in common)
    evidence = tuple((pdet_f[k], pdet_g[k]) for k in cells)
    f_lower = any(a.ci_hi < b.ci_lo for a, b in evidence)
    g_lower = any(b.ci_hi < a.ci_lo for a, b in evidence)
    if f_lower and g_lower:
        # power curves cross: not comparable, but the selectivity evidence
        # required for an INCOMPARABLE verdict is absent
        return ComparisonVerdict(pair, Outcome.UNDECIDED, sel, evidence, note="detection rates cross")
    if f_lower:
        return ComparisonVerdict(pair, Outcome.LEFT_BELOW, sel, evidence)
    if g_lower:
        return ComparisonVerdict(pair, Outcome.RIGHT_BELOW, sel, evidence)
    return ComparisonVerdict(pair, Outcome.EQUIVALENT, sel, evidence)


def compare(
    rule_f: DecisionRule,
    rule_g: DecisionRule,
    gamma: float,
    q_grid: Sequence[float],
    stress_suite: Sequence[str] = DEFAULT_SUITE,
    trials: int = 100_000,
    seed: int = 0,
    conf: float = DEFAULT_CONF,
    slack: float = DEFAULT_SLACK,
) -> ComparisonVerdict:
    for rule in (rule_f, rule_g):
        g = rule_gamma(rule)
        if g is not None and g != gamma:
            raise ParameterError(f"rule {rule.id} has gamma={g}, comparison uses gamma={gamma}")
    if _is_oracle(rule_f) or _is_oracle(rule_g):
        return compare_from_evidence(rule_f, rule_g, None, None, None, None)
    n_f, n_g = rule_n(rule_f), rule_n(rule_g)
    n_f, n_g = n_f or n_g, n_g or n_f
    sel_f = estimate_selectivity(rule_f, gamma, q_grid, stress_suite, trials, seed, conf, slack, n=n_f)
    sel_g = estimate_selectivity(rule_g, gamma, q_grid, stress_suite, trials, seed, conf, slack, n=n_g)
    common = [q for q in sel_f.in_set if q in sel_g.in_set]
    suite = _validate_suite(stress_suite)
    pdet_f = pdet_reports(rule_f, common, suite, trials, seed, conf, n=n_f)
    pdet_g = pdet_reports(rule_g, common, suite, trials, seed, conf, n=n_g)
    return compare_from_evidence(rule_f, rule_g, sel_f, sel_g, pdet_f, pdet_g)


def pdet_curve(
    rule_family: Sequence[DecisionRule],
    scenario_at_q: SignalScenario,
    trials: int,
    seed: int,
    conf: float = DEFAULT_CONF,
) -> list[EvalReport]:
    """Detection rate of each family member under ``scenario_at_q``'s
    interference; the scenario's ``n`` is replaced by each rule's own ``n``."""
    if not rule_family:
        raise ParameterError("rule_family must be nonempty")
    sizes = [rule_n(r) for r in rule_family]
    known = [s for s in sizes if s is not None]
    if known != sorted(known):
        raise ParameterError("rule_family must be ordered by increasing n")
    out = []
    for rule, size in zip(rule_family, sizes):
        scenario = SignalScenario(size or scenario_at_q.n, 1, scenario_at_q.interference)
        out.append(estimate(rule, scenario, trials, seed, conf))
    return out


def growth_flags(curve: Sequence[EvalReport]) -> list[bool]:
    """``True`` where consecutive estimates increase with CI separation."""
    return [b.ci_lo > a.ci_hi for a, b in zip(curve, curve[1:])]
