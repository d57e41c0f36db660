"""Poisson arrivals and the two-state (Gilbert-Elliott) feeder channel."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChainError


class ChannelState(enum.IntEnum):
    BAD = 0
    GOOD = 1


@dataclass(frozen=True)
class PoissonArrivalParams:
    """Mean number of packets arriving at one satellite per slot."""

    lam: float = 10.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class GilbertElliottParams:
    """Feeder link: Bad serves 0 packets per slot, Good serves ``c``.

    ``alpha`` is Pr(Bad -> Good) and ``beta`` is Pr(Good -> Bad).
    """

    alpha: float = 0.7
    beta: float = 0.3
    c: int = 16

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"c must be a positive integer, got {self.c}")
        object.__setattr__(self, "c", int(self.c))

    @property
    def alpha_bar(self) -> float:
        return 1.0 - self.alpha

    @property
    def beta_bar(self) -> float:
        return 1.0 - self.beta

    def rate(self, state: ChannelState) -> int:
        return self.c if state == ChannelState.GOOD else 0

    def transition_matrix(self) -> np.ndarray:
        """Row-stochastic matrix indexed [from, to] with Bad=0, Good=1."""
        return np.array([[self.alpha_bar, self.alpha], [self.beta, self.beta_bar]])


def stationary_distribution(ch: GilbertElliottParams) -> tuple[float, float]:
    """Return ``(pi_bad, pi_good)``."""
    total = ch.alpha + ch.beta
    if total <= 0.0:
        raise DegenerateChainError("alpha = beta = 0: every state is absorbing")
    return ch.beta / total, ch.alpha / total


def step_channel(state: ChannelState, ch: GilbertElliottParams, rng: np.random.Generator) -> ChannelState:
    u = rng.random()
    if state == ChannelState.BAD:
        return ChannelState.GOOD if u < ch.alpha else ChannelState.BAD
    return ChannelState.BAD if u < ch.beta else ChannelState.GOOD


def sample_arrivals(arr: PoissonArrivalParams, rng: np.random.Generator) -> int:
    # numpy switches between inversion and PTRS rejection internally.
    return int(rng.poisson(arr.lam))


def stability_margin(arr: PoissonArrivalParams, ch: GilbertElliottParams) -> float:
    """Mean service minus mean arrivals; the queue is stable iff this is > 0."""
    _, pi_good = stationary_distribution(ch)
    return ch.c * pi_good - arr.lam
