"""Slotted Monte Carlo of L satellites under a buffer-management policy.

Every slot runs, in order: MQLA-ISL reallocation (from the channel states of
the previous slot), measurement against the tracked thresholds, arrivals and
service with the (.)^+ clamp, and the channel step. By default the buffers are
measured before the reallocation, i.e. while each satellite still holds what
it received and kept in the previous slot; ``MeasureEpoch.POST`` measures the
reallocated lengths instead. Random numbers come from
independent streams keyed by (seed, satellite, purpose), so results depend
only on the configuration.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import t as stats_t

from ._jit import njit
from .allocation import PolicyKind, _largest_remainder, _mqla_fractional, mqla_delta
from .errors import ConfigError, ThresholdMismatchError, UntrackedThresholdError
from .stochastic import GilbertElliottParams, PoissonArrivalParams, stationary_distribution

DEFAULT_THRESHOLDS = tuple(range(10, 61, 5))
CHUNK_SLOTS = 1 << 15

# stream purposes
_ARRIVALS, _CHANNEL, _INITIAL = 0, 1, 2

_POLICY_CODE = {PolicyKind.NO_ISL: 0, PolicyKind.VIRTUAL_QUEUE: 1, PolicyKind.MQLA_ISL: 2}


class MeasureEpoch(enum.Enum):
    POST = "post"
    PRE = "pre"


@dataclass(frozen=True)
class ConstellationConfig:
    """One simulation experiment. Defaults are the reference parameter set."""

    L: int = 10
    arr: PoissonArrivalParams = PoissonArrivalParams(10.0)
    ch: GilbertElliottParams = GilbertElliottParams(0.7, 0.3, 16)
    policy: PolicyKind = PolicyKind.MQLA_ISL
    slots: int = 110_000
    warmup_slots: int = 10_000
    seed: int = 0
    thresholds: tuple[int, ...] = DEFAULT_THRESHOLDS
    q_max: int | None = None
    measure_epoch: MeasureEpoch = MeasureEpoch.PRE
    initial_channel: str = "stationary"  # or "good" / "bad"

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError("must be a positive integer", key="L")
        if self.slots < 1:
            raise ConfigError("must be positive", key="slots")
        if not 0 <= self.warmup_slots < self.slots:
            raise ConfigError("must satisfy 0 <= warmup < slots", key="warmup")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("must be a 64-bit unsigned integer", key="seed")
        th = tuple(int(t) for t in self.thresholds)
        if not th:
            raise ConfigError("at least one threshold is required", key="tau")
        if any(t < 0 for t in th) or list(th) != sorted(th):
            raise ConfigError("thresholds must be non-negative and sorted", key="tau")
        object.__setattr__(self, "thresholds", th)
        if self.q_max is not None and self.q_max < 1:
            raise ConfigError("must be a positive integer", key="qmax")
        if self.initial_channel not in ("stationary", "good", "bad"):
            raise ConfigError("must be one of stationary, good, bad", key="initial_channel")
        if self.initial_channel == "stationary" and self.ch.alpha + self.ch.beta == 0:
            raise ConfigError("stationary start needs alpha + beta > 0", key="initial_channel")

    def replace(self, **changes) -> "ConstellationConfig":
        return dataclasses.replace(self, **changes)

    @property
    def measured_samples(self) -> int:
        return (self.slots - self.warmup_slots) * self.L


@dataclass
class QueueStateVector:
    q: np.ndarray
    channel: np.ndarray  # ChannelState values as int8

    @property
    def total(self) -> int:
        return int(self.q.sum())


@dataclass
class OverflowStats:
    """Exceedance counters over post-warmup slot-satellite samples."""

    thresholds: tuple[int, ...]
    samples: int = 0
    exceed: np.ndarray = None
    dropped_packets: int = 0
    drop_events: int = 0
    arrived_packets: int = 0
    max_queue_seen: int = 0
    per_satellite_exceed: np.ndarray | None = None

    def __post_init__(self):
        self.thresholds = tuple(int(t) for t in self.thresholds)
        if self.exceed is None:
            self.exceed = np.zeros(len(self.thresholds), dtype=np.int64)

    @classmethod
    def empty(cls, thresholds: Sequence[int], L: int | None = None) -> "OverflowStats":
        per_sat = None if L is None else np.zeros((L, len(thresholds)), dtype=np.int64)
        return cls(tuple(thresholds), per_satellite_exceed=per_sat)

    def index_of(self, tau: int) -> int:
        try:
            return self.thresholds.index(int(tau))
        except ValueError:
            raise UntrackedThresholdError(f"threshold {tau} is not tracked") from None

    def __eq__(self, other):
        if not isinstance(other, OverflowStats):
            return NotImplemented
        same_per_sat = (self.per_satellite_exceed is None) == (other.per_satellite_exceed is None) and (
            self.per_satellite_exceed is None
            or np.array_equal(self.per_satellite_exceed, other.per_satellite_exceed)
        )
        return (
            self.thresholds == other.thresholds
            and self.samples == other.samples
            and np.array_equal(self.exceed, other.exceed)
            and self.dropped_packets == other.dropped_packets
            and self.drop_events == other.drop_events
            and self.arrived_packets == other.arrived_packets
            and self.max_queue_seen == other.max_queue_seen
            and same_per_sat
        )


def merge_stats(a: OverflowStats, b: OverflowStats) -> OverflowStats:
    if a.thresholds != b.thresholds:
        raise ThresholdMismatchError(f"{a.thresholds} != {b.thresholds}")
    if a.per_satellite_exceed is None or b.per_satellite_exceed is None:
        per_sat = a.per_satellite_exceed if b.samples == 0 else b.per_satellite_exceed if a.samples == 0 else None
        per_sat = None if per_sat is None else per_sat.copy()
    elif a.per_satellite_exceed.shape == b.per_satellite_exceed.shape:
        per_sat = a.per_satellite_exceed + b.per_satellite_exceed
    else:
        per_sat = None
    return OverflowStats(
        thresholds=a.thresholds,
        samples=a.samples + b.samples,
        exceed=a.exceed + b.exceed,
        dropped_packets=a.dropped_packets + b.dropped_packets,
        drop_events=a.drop_events + b.drop_events,
        arrived_packets=a.arrived_packets + b.arrived_packets,
        max_queue_seen=max(a.max_queue_seen, b.max_queue_seen),
        per_satellite_exceed=per_sat,
    )


def estimate_overflow(stats: OverflowStats, tau: int) -> tuple[float, float]:
    """Return ``(p_hat, ci_halfwidth)`` at threshold ``tau``.

    The half-width is the normal-approximation 95% interval, which treats
    slot samples as independent and so understates the error of a
    correlated queue trace. With no exceedances it returns the rule-of-three
    bound ``3 / samples``.
    """
    k = stats.index_of(tau)
    if stats.samples <= 0:
        raise ValueError("no samples recorded")
    p = stats.exceed[k] / stats.samples
    if stats.exceed[k] == 0:
        return 0.0, 3.0 / stats.samples
    return float(p), float(1.96 * math.sqrt(p * (1.0 - p) / stats.samples))


def estimate_drop_rate(stats: OverflowStats) -> tuple[float, float]:
    """Fraction of slot-satellite samples in which packets were dropped."""
    if stats.samples <= 0:
        raise ValueError("no samples recorded")
    p = stats.drop_events / stats.samples
    if stats.drop_events == 0:
        return 0.0, 3.0 / stats.samples
    return float(p), float(1.96 * math.sqrt(p * (1.0 - p) / stats.samples))


def stream(seed: int, satellite: int, purpose: int) -> np.random.Generator:
    """Independent generator for one (satellite, purpose) pair of a run."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(satellite, purpose))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(master: int, *keys: int) -> int:
    """64-bit seed for sub-run ``keys`` (e.g. sweep point, replication)."""
    words = np.random.SeedSequence(entropy=master, spawn_key=tuple(keys)).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def initial_state(config: ConstellationConfig) -> QueueStateVector:
    if config.initial_channel == "good":
        ch = np.ones(config.L, dtype=np.int8)
    elif config.initial_channel == "bad":
        ch = np.zeros(config.L, dtype=np.int8)
    else:
        _, pi_good = stationary_distribution(config.ch)
        ch = np.array(
            [stream(config.seed, l, _INITIAL).random() < pi_good for l in range(config.L)], dtype=np.int8
        )
    return QueueStateVector(q=np.zeros(config.L, dtype=np.int64), channel=ch)


class _Streams:
    """Per-satellite arrival and channel streams drawn in blocks."""

    def __init__(self, config: ConstellationConfig):
        self.lam = config.arr.lam
        self.arrivals = [stream(config.seed, l, _ARRIVALS) for l in range(config.L)]
        self.channel = [stream(config.seed, l, _CHANNEL) for l in range(config.L)]

    def block(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        a = np.column_stack([g.poisson(self.lam, n) for g in self.arrivals]).astype(np.int64)
        u = np.column_stack([g.random(n) for g in self.channel])
        return a, u


@njit(cache=True)
def _run_block(
    A, U, t0, warmup, policy, c, alpha, beta, delta, thresholds, q_max, measure_post,
    q, cur, prev, agg, exceed, per_sat, counters, trace,
):
    """Advance the state over the rows of ``A``/``U`` in place.

    ``agg[0]`` holds the pooled backlog for the virtual queue. ``counters`` is
    [samples, dropped, drop_events, arrived, max_queue]. ``trace`` receives the
    orbit total at the start of each slot when it has a row per slot.
    """
    n, L = A.shape
    K = thresholds.size
    frac = np.empty(L)
    targets = np.empty(L, dtype=np.int64)
    prev_good = np.empty(L, dtype=np.bool_)
    record_trace = trace.size == n
    for i in range(n):
        t = t0 + i
        record = t >= warmup

        if record_trace:
            trace[i] = agg[0] if policy == 1 else q.sum()

        if record and not measure_post:
            _measure(policy, q, agg, L, thresholds, K, exceed, per_sat, counters)

        if policy == 2:
            Q = q.sum()
            for l in range(L):
                prev_good[l] = prev[l] == 1
            _mqla_fractional(float(Q), prev_good, delta, frac)
            _largest_remainder(frac, Q, targets)
            for l in range(L):
                q[l] = targets[l]

        if record and measure_post:
            _measure(policy, q, agg, L, thresholds, K, exceed, per_sat, counters)

        if policy == 1:
            total = agg[0]
            for l in range(L):
                total += A[i, l]
                if cur[l] == 1:
                    total -= c
                if record:
                    counters[3] += A[i, l]
            if total < 0:
                total = 0
            if q_max >= 0 and total > q_max * L:
                if record:
                    counters[1] += total - q_max * L
                    counters[2] += L
                total = q_max * L
            agg[0] = total
        else:
            for l in range(L):
                v = q[l] + A[i, l]
                if cur[l] == 1:
                    v -= c
                if v < 0:
                    v = 0
                if record:
                    counters[3] += A[i, l]
                if q_max >= 0 and v > q_max:
                    if record:
                        counters[1] += v - q_max
                        counters[2] += 1
                    v = q_max
                q[l] = v

        for l in range(L):
            prev[l] = cur[l]
            if cur[l] == 1:
                if U[i, l] < beta:
                    cur[l] = 0
            elif U[i, l] < alpha:
                cur[l] = 1


@njit(cache=True)
def _measure(policy, q, agg, L, thresholds, K, exceed, per_sat, counters):
    counters[0] += L
    if policy == 1:
        # normalized pooled length Q / L against tau, counted once per satellite
        total = agg[0]
        level = (total + L - 1) // L
        if level > counters[4]:
            counters[4] = level
        for k in range(K):
            if total > thresholds[k] * L:
                exceed[k] += L
                for l in range(L):
                    per_sat[l, k] += 1
            else:
                break
        return
    for l in range(L):
        v = q[l]
        if v > counters[4]:
            counters[4] = v
        for k in range(K):
            if v > thresholds[k]:
                exceed[k] += 1
                per_sat[l, k] += 1
            else:
                break


def _simulate(config: ConstellationConfig, want_trace: bool):
    state = initial_state(config)
    q = state.q
    cur = state.channel.copy()
    prev = state.channel.copy()
    agg = np.zeros(1, dtype=np.int64)
    thresholds = np.asarray(config.thresholds, dtype=np.int64)
    exceed = np.zeros(thresholds.size, dtype=np.int64)
    per_sat = np.zeros((config.L, thresholds.size), dtype=np.int64)
    counters = np.zeros(5, dtype=np.int64)
    streams = _Streams(config)
    traces = []
    ch = config.ch
    q_max = -1 if config.q_max is None else int(config.q_max)
    for t0 in range(0, config.slots, CHUNK_SLOTS):
        n = min(CHUNK_SLOTS, config.slots - t0)
        A, U = streams.block(n)
        trace = np.empty(n if want_trace else 0, dtype=np.int64)
        _run_block(
            A, U, t0, config.warmup_slots, _POLICY_CODE[config.policy], ch.c, ch.alpha, ch.beta,
            mqla_delta(ch), thresholds, q_max, config.measure_epoch is MeasureEpoch.POST,
            q, cur, prev, agg, exceed, per_sat, counters, trace,
        )
        if want_trace:
            traces.append(trace)
    stats = OverflowStats(
        thresholds=config.thresholds,
        samples=int(counters[0]),
        exceed=exceed,
        dropped_packets=int(counters[1]),
        drop_events=int(counters[2]),
        arrived_packets=int(counters[3]),
        max_queue_seen=int(counters[4]),
        per_satellite_exceed=per_sat,
    )
    return stats, (np.concatenate(traces) if want_trace else None)


def run_simulation(config: ConstellationConfig) -> OverflowStats:
    return _simulate(config, want_trace=False)[0]


def total_queue_trace(config: ConstellationConfig) -> np.ndarray:
    """Orbit-wide backlog at the start of every slot (pooled Q for the virtual queue)."""
    return _simulate(config, want_trace=True)[1]


def replication_runs(
    config: ConstellationConfig, replications: int, point: int = 0, workers: int | None = None
) -> list[OverflowStats]:
    """Independent runs seeded from (config.seed, point, r), r = 0..replications-1."""
    configs = [config.replace(seed=derive_seed(config.seed, point, r)) for r in range(replications)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_simulation, configs))
    return [run_simulation(c) for c in configs]


def run_replications(
    config: ConstellationConfig, replications: int, point: int = 0, workers: int | None = None
) -> OverflowStats:
    """Merge of :func:`replication_runs`."""
    total = OverflowStats.empty(config.thresholds, config.L)
    for s in replication_runs(config, replications, point, workers):
        total = merge_stats(total, s)
    return total


def estimate_overflow_replicated(runs: Sequence[OverflowStats], tau: int) -> tuple[float, float]:
    """Pooled ``p_hat`` with a Student-t 95% half-width across independent runs.

    Unlike :func:`estimate_overflow` this interval accounts for correlation
    within a run. If no run saw an exceedance the rule-of-three bound on the
    pooled sample count is returned.
    """
    if len(runs) < 2:
        raise ValueError("need at least two replications")
    per_run = np.array([s.exceed[s.index_of(tau)] / s.samples for s in runs])
    n = sum(s.samples for s in runs)
    hits = sum(int(s.exceed[s.index_of(tau)]) for s in runs)
    if hits == 0:
        return 0.0, 3.0 / n
    half = stats_t.ppf(0.975, len(runs) - 1) * per_run.std(ddof=1) / math.sqrt(len(runs))
    return hits / n, float(half)
