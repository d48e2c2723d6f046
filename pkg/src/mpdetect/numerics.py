"""Gaussian special functions, the order-1/2 Marcum Q function and the
threshold solver used by the distortion test.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from .errors import NumericalError, ParameterError

_SQRT2 = math.sqrt(2.0)
_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class ToleranceConfig:
    """Stopping rules for the root finders.

    ``root_tol`` bounds the error on the *function value*, not on the root.
    """

    root_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.root_tol > 0:
            raise ParameterError(f"root_tol must be positive, got {self.root_tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = ToleranceConfig()


def _check_probability(p: float, name: str = "p") -> None:
    if not (0.0 < p < 1.0):
        raise ParameterError(f"{name} must lie in (0, 1), got {p}")


def gaussian_cdf(x: float) -> float:
    """Standard normal CDF, computed through ``erfc`` so both tails keep
    full relative precision."""
    if not math.isfinite(x):
        raise ParameterError(f"gaussian_cdf needs a finite argument, got {x}")
    return 0.5 * math.erfc(-x / _SQRT2)


def gaussian_quantile(p: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Inverse of :func:`gaussian_cdf`.

    Starts from the stdlib rational approximation and polishes with Newton
    steps against :func:`gaussian_cdf`, so the two functions round-trip to
    ``cfg.root_tol``.
    """
    _check_probability(p)
    x = _STD_NORMAL.inv_cdf(p)
    for _ in range(cfg.max_iter):
        err = gaussian_cdf(x) - p
        if abs(err) <= cfg.root_tol:
            return x
        x -= err / _STD_NORMAL.pdf(x)
    raise NumericalError(f"gaussian_quantile({p}) did not converge")


def marcum_q_half(rho: float, lam: float) -> float:
    """Generalized Marcum Q function of order 1/2.

    Equals ``P(|rho + Z| > lam)`` for standard normal ``Z``, i.e.
    ``1 - Phi(lam - rho) + Phi(-lam - rho)``. Written as a sum of two lower
    tails to avoid cancellation when the result is small.
    """
    if rho < 0 or lam < 0:
        raise ParameterError(f"marcum_q_half needs rho, lam >= 0, got ({rho}, {lam})")
    return min(1.0, gaussian_cdf(rho - lam) + gaussian_cdf(-lam - rho))


def rdt_threshold(rho: float, gamma: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Return ``lam >= 0`` with ``marcum_q_half(rho, lam) == gamma``.

    Bracketed bisection: ``Q(rho, 0) = 1 > gamma`` gives the lower end, the
    upper end doubles until ``Q`` drops below ``gamma``.
    """
    if rho < 0 or not math.isfinite(rho):
        raise ParameterError(f"rho must be finite and >= 0, got {rho}")
    _check_probability(gamma, "gamma")

    lo, hi = 0.0, max(1.0, 2.0 * rho)
    for _ in range(cfg.max_iter):
        if marcum_q_half(rho, hi) < gamma:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError(f"could not bracket the threshold for rho={rho}, gamma={gamma}")

    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        err = marcum_q_half(rho, mid) - gamma
        if abs(err) <= cfg.root_tol or mid in (lo, hi):
            return mid
        # Q decreases in lam
        if err > 0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(marcum_q_half(rho, mid) - gamma) <= cfg.root_tol:
        return mid
    raise NumericalError(f"threshold bisection did not converge for rho={rho}, gamma={gamma}")
