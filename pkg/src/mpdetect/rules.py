"""Decision rules: Neyman-Pearson, random distortion test (RDT), the ideal
oracle and two constant baselines, plus closed-form error probabilities
under a constant interference shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParameterError
from .numerics import DEFAULT_TOL, ToleranceConfig, gaussian_cdf, gaussian_quantile, marcum_q_half, rdt_threshold


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")


def _check_gamma(gamma: float) -> None:
    if not (0.0 < gamma < 1.0):
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")


def _check_tau(tau: float) -> None:
    if not (0.0 <= tau < 1.0):
        raise ParameterError(f"tau must lie in [0, 1), got {tau}")


@dataclass(frozen=True)
class NP:
    """Rejects when ``sum(y) > threshold_eta``."""

    n: int
    gamma: float
    threshold_eta: float

    family = "np"

    @property
    def id(self) -> str:
        return f"np_n{self.n}"


@dataclass(frozen=True)
class RDT:
    """Rejects when ``|sqrt(n) * mean(y)| > threshold_lambda``."""

    n: int
    gamma: float
    tau: float
    threshold_lambda: float

    family = "rdt"

    @property
    def id(self) -> str:
        return f"rdt_n{self.n}_tau{self.tau:g}"


@dataclass(frozen=True)
class Oracle:
    """Ideal device that reads the true signal bit."""

    gamma: float

    family = "oracle"

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)

    @property
    def id(self) -> str:
        return "oracle"


@dataclass(frozen=True)
class AlwaysZero:
    family = "always_zero"

    @property
    def id(self) -> str:
        return "always_zero"


@dataclass(frozen=True)
class AlwaysOne:
    family = "always_one"

    @property
    def id(self) -> str:
        return "always_one"


DecisionRule = Union[NP, RDT, Oracle, AlwaysZero, AlwaysOne]


def rule_n(rule: DecisionRule) -> int | None:
    return getattr(rule, "n", None)


def rule_gamma(rule: DecisionRule) -> float | None:
    return getattr(rule, "gamma", None)


def np_build(n: int, gamma: float, cfg: ToleranceConfig = DEFAULT_TOL) -> NP:
    _check_n(n)
    _check_gamma(gamma)
    return NP(n=int(n), gamma=gamma, threshold_eta=math.sqrt(n) * gaussian_quantile(1.0 - gamma, cfg))


def rdt_build(n: int, gamma: float, tau: float, cfg: ToleranceConfig = DEFAULT_TOL) -> RDT:
    """Build the distortion test at tolerance ``tau``.

    The threshold is solved at noncentrality ``sqrt(n) * tau`` so that any
    mean shift of magnitude at most ``tau`` keeps the false-alarm rate at or
    below ``gamma``.
    """
    _check_n(n)
    _check_gamma(gamma)
    _check_tau(tau)
    lam = rdt_threshold(math.sqrt(n) * tau, gamma, cfg)
    return RDT(n=int(n), gamma=gamma, tau=tau, threshold_lambda=lam)


def statistic(rule: NP | RDT, data: np.ndarray) -> np.ndarray:
    """Row-wise test statistic for a ``trials x n`` matrix."""
    total = np.sum(data, axis=1)
    if isinstance(rule, NP):
        return total
    return np.abs(total) / math.sqrt(rule.n)


def decide_batch(
    rule: DecisionRule, data: np.ndarray, epsilon_true: int, aux_uniform: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized :func:`decide` over the rows of ``data``; returns 0/1 ints."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ParameterError(f"expected a 2-D trials x n array, got shape {data.shape}")
    rows = data.shape[0]
    if isinstance(rule, (NP, RDT)):
        if data.shape[1] != rule.n:
            raise ParameterError(f"row length {data.shape[1]} does not match rule n={rule.n}")
        threshold = rule.threshold_eta if isinstance(rule, NP) else rule.threshold_lambda
        # ties decide 0
        return (statistic(rule, data) > threshold).astype(np.int8)
    if isinstance(rule, Oracle):
        if epsilon_true not in (0, 1):
            raise ParameterError(f"epsilon_true must be 0 or 1, got {epsilon_true}")
        return np.full(rows, epsilon_true, dtype=np.int8)
    if isinstance(rule, AlwaysZero):
        return np.zeros(rows, dtype=np.int8)
    if isinstance(rule, AlwaysOne):
        return np.ones(rows, dtype=np.int8)
    raise ParameterError(f"unknown decision rule {rule!r}")


def decide(rule: DecisionRule, row, epsilon_true: int, aux_uniform: float = 0.0) -> int:
    """Apply ``rule`` to a single observation vector."""
    arr = np.asarray(row, dtype=float).reshape(1, -1)
    return int(decide_batch(rule, arr, epsilon_true, np.array([aux_uniform]))[0])


def np_pfa_closed(n: int, gamma: float, shift: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """False-alarm probability of the NP test when every sample carries a
    constant offset ``shift``."""
    _check_n(n)
    _check_gamma(gamma)
    z = gaussian_quantile(1.0 - gamma, cfg)
    return gaussian_cdf(math.sqrt(n) * shift - z)


def np_pdet_closed(n: int, gamma: float, shift: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    return np_pfa_closed(n, gamma, 1.0 + shift, cfg)


def rdt_pfa_closed(n: int, gamma: float, tau: float, shift: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """False-alarm probability of the RDT test under a constant offset."""
    if not abs(shift) < 0.5:
        raise ParameterError(f"|shift| must be < 1/2, got {shift}")
    rule = rdt_build(n, gamma, tau, cfg)
    return marcum_q_half(math.sqrt(n) * abs(shift), rule.threshold_lambda)


def rdt_pdet_closed(n: int, gamma: float, tau: float, shift: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    rule = rdt_build(n, gamma, tau, cfg)
    return marcum_q_half(math.sqrt(n) * abs(1.0 + shift), rule.threshold_lambda)


def closed_form_rate(rule: DecisionRule, epsilon: int, shift: float) -> float | None:
    """Exact probability of deciding 1 under a constant offset ``shift``.

    Returns ``None`` when no closed form is known for the rule.
    """
    mean = epsilon + shift
    if isinstance(rule, NP):
        z = (rule.threshold_eta - rule.n * mean) / math.sqrt(rule.n)
        return gaussian_cdf(-z)
    if isinstance(rule, RDT):
        return marcum_q_half(math.sqrt(rule.n) * abs(mean), rule.threshold_lambda)
    if isinstance(rule, Oracle):
        return float(epsilon)
    if isinstance(rule, AlwaysZero):
        return 0.0
    if isinstance(rule, AlwaysOne):
        return 1.0
    return None
