"""Buffer-management policies and the MQLA-ISL min-max reallocation.

MQLA-ISL pools the ``Q`` packets stored across the orbit and hands them back so
that the largest expected next-slot backlog is as small as possible. Each
satellite's expected service depends only on its channel state in the
previous slot, so the optimum gives every previously-Bad satellite the same
target ``x`` and every previously-Good satellite the same target ``y``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._jit import njit
from .errors import SumMismatchError
from .stochastic import ChannelState, GilbertElliottParams, PoissonArrivalParams


class PolicyKind(enum.Enum):
    NO_ISL = "no-isl"
    VIRTUAL_QUEUE = "virtual"
    MQLA_ISL = "mqla"


CASE_TAGS = {1: "I", 2: "II", 3: "III"}


@dataclass(frozen=True)
class AllocationDecision:
    """``bad_target``/``good_target`` are the shares ``x``/``y`` per group."""

    fractional: np.ndarray
    targets: np.ndarray
    case_tag: str
    delta: float
    z_count: int
    bad_target: float
    good_target: float


@njit(cache=True)
def _mqla_xy(Q, L, Z, delta):
    """Return ``(case, x, y)``; an empty group's share is reported as 0."""
    if Q == 0:
        return 3, 0.0, 0.0
    if Z > 0 and delta > Q / Z:
        return 1, 0.0, Q / Z
    if Z < L and delta < -Q / (L - Z):
        return 2, Q / (L - Z), 0.0
    x = max(0.0, (Q - Z * delta) / L) if Z < L else 0.0
    y = max(0.0, (Q + (L - Z) * delta) / L) if Z > 0 else 0.0
    return 3, x, y


@njit(cache=True)
def _mqla_fractional(Q, prev_good, delta, out):
    """Fill ``out`` with the min-max targets; returns ``(case, x, y)``."""
    L = prev_good.size
    Z = 0
    for l in range(L):
        if prev_good[l]:
            Z += 1
    case, x, y = _mqla_xy(Q, L, Z, delta)
    for l in range(L):
        out[l] = y if prev_good[l] else x
    return case, x, y


@njit(cache=True)
def _largest_remainder(frac, Q, out):
    """Floor, then hand out leftover units by descending remainder (low index wins ties)."""
    L = frac.size
    rem = np.empty(L)
    total = 0
    for l in range(L):
        f = np.floor(frac[l])
        out[l] = np.int64(f)
        rem[l] = frac[l] - f
        total += out[l]
    leftover = Q - total
    for _ in range(leftover):
        best = -1
        best_rem = -1.0
        for l in range(L):
            if rem[l] > best_rem + 1e-9:
                best = l
                best_rem = rem[l]
        out[best] += 1
        rem[best] = -2.0
    if leftover < 0:
        # floors overshot by rounding noise; take units back from the smallest remainders
        for _ in range(-leftover):
            worst = -1
            worst_rem = 2.0
            for l in range(L - 1, -1, -1):
                if out[l] > 0 and rem[l] < worst_rem - 1e-9:
                    worst = l
                    worst_rem = rem[l]
            out[worst] -= 1
            rem[worst] = 3.0


def _as_good_mask(prev_states: Sequence[ChannelState]) -> np.ndarray:
    return np.array([s == ChannelState.GOOD for s in prev_states], dtype=np.bool_)


def mqla_delta(ch: GilbertElliottParams) -> float:
    """Expected-service gap between a previously-Good and previously-Bad satellite."""
    return ch.c * (ch.beta_bar - ch.alpha)


def integerize(fractional: Sequence[float], Q: int) -> np.ndarray:
    frac = np.asarray(fractional, dtype=float)
    if np.any(frac < 0):
        raise ValueError("fractional targets must be non-negative")
    if abs(frac.sum() - Q) > 1e-6 * max(1.0, Q):
        raise SumMismatchError(f"fractional targets sum to {frac.sum()}, expected {Q}")
    out = np.empty(frac.size, dtype=np.int64)
    _largest_remainder(frac, int(Q), out)
    return out


def mqla_allocate(Q: int, prev_states: Sequence[ChannelState], ch: GilbertElliottParams) -> AllocationDecision:
    if Q < 0:
        raise ValueError("Q must be non-negative")
    good = _as_good_mask(prev_states)
    if good.size == 0:
        raise ValueError("need at least one satellite")
    delta = mqla_delta(ch)
    frac = np.empty(good.size)
    case, x, y = _mqla_fractional(float(Q), good, delta, frac)
    return AllocationDecision(
        fractional=frac,
        targets=integerize(frac, int(Q)),
        case_tag=CASE_TAGS[int(case)],
        delta=delta,
        z_count=int(good.sum()),
        bad_target=float(x),
        good_target=float(y),
    )


def expected_next_load(
    q: float, prev_state: ChannelState, arr: PoissonArrivalParams, ch: GilbertElliottParams
) -> float:
    """Mean pre-reallocation backlog one slot ahead given last slot's channel state."""
    p_good_next = ch.alpha if prev_state == ChannelState.BAD else ch.beta_bar
    return q + arr.lam - ch.c * p_good_next


def allocation_objective(
    targets: Sequence[float],
    prev_states: Sequence[ChannelState],
    arr: PoissonArrivalParams,
    ch: GilbertElliottParams,
) -> float:
    """Largest expected next-slot backlog over the orbit."""
    return max(expected_next_load(q, s, arr, ch) for q, s in zip(targets, prev_states))
