"""Independent reference computations, kept separate from the code under
test: mpmath at 40 digits and scipy quadrature."""

import mpmath as mp
from scipy import integrate

mp.mp.dps = 40


def cdf_by_quadrature(x: float) -> float:
    density = lambda t: mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi)
    return float(mp.mpf("0.5") + mp.quad(density, [0, x]))


def cdf_by_scipy_quad(x: float) -> float:
    import math

    val, _ = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), -math.inf, x)
    return val


def _bisect(f, lo, hi, steps=200):
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    for _ in range(steps):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def quantile_by_bisection(p: float) -> float:
    return float(_bisect(lambda x: mp.ncdf(x) - mp.mpf(p), -40, 40))


def folded_tail(rho: float, lam: float) -> float:
    """P(|rho + Z| > lam) at high precision."""
    rho, lam = mp.mpf(rho), mp.mpf(lam)
    return float(1 - mp.ncdf(lam - rho) + mp.ncdf(-lam - rho))


def folded_threshold(rho: float, gamma: float) -> float:
    rho, gamma = mp.mpf(rho), mp.mpf(gamma)
    return float(_bisect(lambda l: gamma - (1 - mp.ncdf(l - rho) + mp.ncdf(-l - rho)), 0, 100))


def np_detection(n: int, gamma: float, shift: float = 0.0) -> float:
    z = _bisect(lambda x: mp.ncdf(x) - (1 - mp.mpf(gamma)), -40, 40)
    return float(1 - mp.ncdf(z - mp.sqrt(n) * (1 + mp.mpf(shift))))
