"""Effective-bandwidth analysis of a single satellite buffer.

The arrival and service LMGFs give the QoS exponent ``theta*`` as the positive
root of ``lmgf_arrival(theta) + lmgf_departure(-theta) = 0``; the queue tail then
behaves like ``exp(-theta* tau)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InstabilityError, NoBracketError
from .stochastic import GilbertElliottParams, PoissonArrivalParams, stability_margin

THETA_MIN = 1e-8
THETA_MAX = 1e3


@dataclass(frozen=True)
class QosSolution:
    theta_star: float
    residual: float
    iterations: int


def lmgf_arrival(arr: PoissonArrivalParams, theta: float) -> float:
    return arr.lam * math.expm1(theta)


def lmgf_departure(ch: GilbertElliottParams, theta: float) -> float:
    """Log spectral radius of the tilted transition matrix of the service chain.

    For ``u = exp(c theta)`` the dominant eigenvalue is
    ``(abar + bbar u + sqrt((abar - bbar u)^2 + 4 alpha beta u)) / 2``. For
    theta > 0 the factor ``u`` is pulled out so nothing overflows.
    """
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    if theta == 0.0:
        return 0.0
    a_bar, b_bar = ch.alpha_bar, ch.beta_bar
    ab = ch.alpha * ch.beta
    ct = ch.c * theta
    if ct > 0:
        v = math.exp(-ct)
        # eigenvalue / u
        disc = (a_bar * v - b_bar) ** 2 + 4.0 * ab * v
        return ct + math.log(0.5 * (a_bar * v + b_bar + math.sqrt(disc)))
    u = math.exp(ct)
    disc = (a_bar - b_bar * u) ** 2 + 4.0 * ab * u
    return math.log(0.5 * (a_bar + b_bar * u + math.sqrt(disc)))


def qos_root_function(arr: PoissonArrivalParams, ch: GilbertElliottParams) -> Callable[[float], float]:
    return lambda theta: lmgf_arrival(arr, theta) + lmgf_departure(ch, -theta)


def bisect_positive_root(
    f: Callable[[float], float],
    lo: float = THETA_MIN,
    theta_max: float = THETA_MAX,
    tol: float = 1e-10,
) -> QosSolution:
    """Find the sign change of ``f`` above ``lo`` where f(lo) < 0 < f(+inf).

    The upper end is doubled from ``lo`` until ``f`` turns positive, then the
    bracket is bisected down to floating-point resolution.
    """
    if f(lo) >= 0:
        raise NoBracketError(f"root function is not negative at the lower end {lo}")
    hi = 2.0 * lo
    iterations = 0
    while f(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if hi > theta_max:
            raise NoBracketError(f"no sign change found below theta_max={theta_max}")
    mid = 0.5 * (lo + hi)
    f_mid = f(mid)
    for _ in range(2000):
        iterations += 1
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        new_mid = 0.5 * (lo + hi)
        if new_mid in (lo, hi):
            break
        mid = new_mid
        f_mid = f(mid)
    if abs(f_mid) > tol:
        raise NoBracketError(f"bisection ended with residual {f_mid:.3e} above tol={tol}")
    return QosSolution(theta_star=mid, residual=f_mid, iterations=iterations)


def solve_qos_exponent(
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
    tol: float = 1e-10,
    theta_max: float = THETA_MAX,
) -> QosSolution:
    margin = stability_margin(arr, ch)
    if margin <= 0:
        raise InstabilityError(
            f"lambda={arr.lam} >= mean service {ch.c * ch.alpha / (ch.alpha + ch.beta)}; no positive QoS exponent"
        )
    if arr.lam == 0:
        # No arrivals: f(theta) = lmgf_departure(-theta) < 0 for every theta.
        raise NoBracketError("lambda = 0: the queue never builds up, exponent is infinite")
    return bisect_positive_root(qos_root_function(arr, ch), THETA_MIN, theta_max, tol)


def virtual_queue_exponent(theta_star: float, L: int) -> float:
    """Exponent of the pooled queue of ``L`` satellites, measured per satellite."""
    if theta_star <= 0 or L < 1:
        raise ValueError("need theta_star > 0 and L >= 1")
    return L * theta_star


def overflow_bound(theta: float, tau: float) -> float:
    return math.exp(-theta * tau)


def required_buffer(theta: float, target_prob: float) -> int:
    """Smallest integer buffer whose tail bound is at most ``target_prob``."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if not 0.0 < target_prob < 1.0:
        raise ValueError("target_prob must lie in (0, 1)")
    return max(1, math.ceil(-math.log(target_prob) / theta))
