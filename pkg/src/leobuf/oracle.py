"""Ground-truth computations used to check the simulator and the allocator.

``single_leo_stationary`` solves the joint (queue length, channel) chain of one
satellite exactly, up to truncation of the queue at ``q_cap`` and of the
Poisson arrivals at ``a_max``. ``brute_force_allocation`` minimizes the
reallocation objective by direct search.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .allocation import allocation_objective
from .errors import InstabilityError, TruncationWarning
from .stochastic import (
    ChannelState,
    GilbertElliottParams,
    PoissonArrivalParams,
    stability_margin,
    stationary_distribution,
)

BOUNDARY_MASS_LIMIT = 1e-9


def default_a_max(lam: float) -> int:
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 20.0))


@dataclass(frozen=True)
class TruncatedChainSpec:
    q_cap: int = 600
    a_max: int | None = None  # None -> lam + 12 sqrt(lam) + 20
    tol: float = 1e-13
    max_iter: int = 200_000

    def __post_init__(self):
        if self.q_cap < 1:
            raise ValueError("q_cap must be >= 1")
        if self.a_max is not None and self.a_max < 1:
            raise ValueError("a_max must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class StationaryDistribution:
    """Joint law at the start of a slot; ``probs[q, s]`` with s = 0 (Bad) or 1 (Good)."""

    probs: np.ndarray
    iterations: int
    residual: float

    @property
    def q_cap(self) -> int:
        return self.probs.shape[0] - 1

    def queue_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)


def truncated_poisson_pmf(lam: float, a_max: int) -> np.ndarray:
    """Poisson pmf on 0..a_max with the upper tail lumped into a_max."""
    pmf = stats.poisson.pmf(np.arange(a_max + 1), lam)
    pmf[-1] += stats.poisson.sf(a_max, lam)
    return pmf


def slot_transition(
    probs: np.ndarray, pmf: np.ndarray, ch: GilbertElliottParams
) -> np.ndarray:
    """Push a joint (queue, channel) law through one slot.

    Within the slot: arrivals are added, the current state's rate is served,
    the result is clamped to [0, q_cap], then the channel steps.
    """
    q_cap = probs.shape[0] - 1
    P = ch.transition_matrix()
    served = np.empty_like(probs)
    for s, rate in ((0, 0), (1, ch.c)):
        conv = np.convolve(probs[:, s], pmf)  # index = q + a
        out = np.zeros(q_cap + 1)
        # q + a - rate <= 0 goes to 0; >= q_cap goes to q_cap
        lo = min(rate, conv.size - 1)
        out[0] = conv[: lo + 1].sum()
        mid = conv[lo + 1 : rate + q_cap]
        out[1 : 1 + mid.size] = mid
        out[q_cap] += conv[rate + q_cap :].sum()
        served[:, s] = out
    return served @ P


def single_leo_stationary(
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
    spec: TruncatedChainSpec = TruncatedChainSpec(),
    allow_unstable: bool = False,
) -> StationaryDistribution:
    """Stationary law of q(t+1) = (q(t) + a(t) - d(t))^+ jointly with the channel.

    Solved by power iteration from an empty queue with the channel at its
    stationary law (all-Bad when the chain is absorbing). Emits
    ``TruncationWarning`` when the mass at ``q_cap`` is ``>= 1e-9``.
    """
    if ch.alpha + ch.beta > 0:
        margin = stability_margin(arr, ch)
        pi = np.array(stationary_distribution(ch))
    else:
        margin = -arr.lam if ch.alpha == 0 else ch.c - arr.lam
        pi = np.array([1.0, 0.0])
    if margin <= 0 and not allow_unstable:
        raise InstabilityError(f"stability margin {margin:.4g} <= 0")

    a_max = spec.a_max if spec.a_max is not None else default_a_max(arr.lam)
    pmf = truncated_poisson_pmf(arr.lam, a_max)
    probs = np.zeros((spec.q_cap + 1, 2))
    probs[0] = pi
    residual = math.inf
    it = 0
    for it in range(1, spec.max_iter + 1):
        nxt = slot_transition(probs, pmf, ch)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - probs).max())
        probs = nxt
        if residual <= spec.tol:
            break
    else:
        warnings.warn(
            f"power iteration stopped after {spec.max_iter} iterations with residual {residual:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    boundary = probs[-1].sum()
    if boundary >= BOUNDARY_MASS_LIMIT:
        warnings.warn(
            f"mass {boundary:.3e} at q_cap={spec.q_cap}; increase q_cap",
            TruncationWarning,
            stacklevel=2,
        )
    return StationaryDistribution(probs=probs, iterations=it, residual=residual)


def oracle_overflow(dist: StationaryDistribution, tau: int) -> float:
    """Pr(q > tau) under ``dist``."""
    marginal = dist.queue_marginal()
    if tau < 0:
        return float(marginal.sum())
    if tau >= dist.q_cap:
        return 0.0
    return float(marginal[tau + 1 :].sum())


def _objective_two_groups(x, y, Z, L, arr, ch):
    """Vectorized max expected load for Bad share(s) x and Good share(s) y."""
    bad = x + arr.lam - ch.c * ch.alpha
    good = y + arr.lam - ch.c * ch.beta_bar
    if Z == 0:
        return bad
    if Z == L:
        return good
    return np.maximum(bad, good)


def brute_force_allocation(
    Q: int,
    prev_states: Sequence[ChannelState],
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
    grid_step: float = 0.01,
) -> tuple[np.ndarray, float]:
    """Grid search over the line x (L - Z) + y Z = Q, x, y >= 0.

    The scanned variable is the one belonging to the larger group, so one grid
    step moves the objective by at most one step. Both end points of the
    feasible segment are always included.
    """
    states = list(prev_states)
    L = len(states)
    good = np.array([s == ChannelState.GOOD for s in states])
    Z = int(good.sum())
    if Z == 0 or Z == L:
        x = y = np.array([Q / L])
    elif L - Z >= Z:
        hi = Q / (L - Z)
        x = np.append(np.arange(0.0, hi, grid_step), hi)
        y = np.maximum(0.0, (Q - x * (L - Z)) / Z)
    else:
        hi = Q / Z
        y = np.append(np.arange(0.0, hi, grid_step), hi)
        x = np.maximum(0.0, (Q - y * Z) / (L - Z))
    obj = _objective_two_groups(x, y, Z, L, arr, ch)
    k = int(np.argmin(obj))
    targets = np.where(good, y[k], x[k])
    return targets, float(obj[k])


def brute_force_simplex(
    Q: int,
    prev_states: Sequence[ChannelState],
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
    grid_step: float = 0.05,
) -> tuple[np.ndarray, float]:
    """Full grid over the simplex sum(q) = Q without the two-value reduction.

    Cost grows as (Q / grid_step)^(L - 1); meant for L <= 3.
    """
    states = list(prev_states)
    L = len(states)
    if L > 4:
        raise ValueError("simplex scan is only practical for L <= 4")
    offsets = np.array([
        ch.c * (ch.beta_bar if s == ChannelState.GOOD else ch.alpha) for s in states
    ])
    axis = np.append(np.arange(0.0, Q, grid_step), float(Q))
    best_obj, best = math.inf, None
    for head in itertools.product(range(axis.size), repeat=max(0, L - 2)):
        partial = axis[list(head)].sum() if head else 0.0
        if partial > Q + 1e-12:
            continue
        second = axis[axis <= Q - partial + 1e-12]
        last = np.maximum(0.0, Q - partial - second)
        cols = [np.full(second.size, axis[h]) for h in head] + [second, last]
        grid = np.column_stack(cols) if L > 1 else np.array([[float(Q)]])
        obj = (grid + arr.lam - offsets).max(axis=1)
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_obj, best = float(obj[k]), grid[k]
    return best, best_obj


def closed_form_objective(
    targets: Sequence[float],
    prev_states: Sequence[ChannelState],
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
) -> float:
    return allocation_objective(targets, prev_states, arr, ch)
