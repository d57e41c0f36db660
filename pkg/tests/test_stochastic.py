import math

import numpy as np
import pytest

from leobuf import (
    ChannelState,
    DegenerateChainError,
    GilbertElliottParams,
    PoissonArrivalParams,
    sample_arrivals,
    stability_margin,
    stationary_distribution,
    step_channel,
)

BAD, GOOD = ChannelState.BAD, ChannelState.GOOD


@pytest.mark.parametrize(
    "alpha, beta, expected",
    [(0.7, 0.3, (0.3, 0.7)), (0.5, 0.5, (0.5, 0.5)), (1.0, 0.0, (0.0, 1.0))],
)
def test_stationary_distribution(alpha, beta, expected):
    pi = stationary_distribution(GilbertElliottParams(alpha, beta, 16))
    assert pi == pytest.approx(expected, abs=1e-15)
    assert sum(pi) == pytest.approx(1.0, abs=1e-15)


def test_stationary_is_fixed_point():
    rng = np.random.default_rng(3)
    for _ in range(50):
        ch = GilbertElliottParams(rng.uniform(0.01, 1), rng.uniform(0.01, 1), 8)
        pi = np.array(stationary_distribution(ch))
        np.testing.assert_allclose(pi @ ch.transition_matrix(), pi, atol=1e-12)


def test_degenerate_chain():
    with pytest.raises(DegenerateChainError):
        stationary_distribution(GilbertElliottParams(0.0, 0.0, 4))


@pytest.mark.parametrize("kwargs", [dict(alpha=1.5), dict(beta=-0.1), dict(c=0), dict(c=2.5)])
def test_channel_validation(kwargs):
    with pytest.raises(ValueError):
        GilbertElliottParams(**kwargs)


def test_forced_transitions():
    rng = np.random.default_rng(0)
    assert all(step_channel(BAD, GilbertElliottParams(1.0, 0.5, 4), rng) is GOOD for _ in range(100))
    assert all(step_channel(GOOD, GilbertElliottParams(0.5, 0.0, 4), rng) is GOOD for _ in range(100))


def test_transition_frequency_from_bad():
    rng = np.random.default_rng(11)
    ch = GilbertElliottParams(0.7, 0.3, 16)
    n = 10**6
    hits = sum(step_channel(BAD, ch, rng) is GOOD for _ in range(n))
    assert abs(hits / n - 0.7) < 0.005


def test_good_fraction_converges_to_pi1():
    rng = np.random.default_rng(5)
    ch = GilbertElliottParams(0.2, 0.1, 4)
    state, good, n = BAD, 0, 10**6
    for _ in range(n):
        state = step_channel(state, ch, rng)
        good += state is GOOD
    pi1 = stationary_distribution(ch)[1]
    # lag-1 correlation of the indicator is 1 - alpha - beta
    rho = 1 - ch.alpha - ch.beta
    se = math.sqrt(pi1 * (1 - pi1) / n * (1 + rho) / (1 - rho))
    assert abs(good / n - pi1) < 3 * se


def test_poisson_zero_rate():
    rng = np.random.default_rng(0)
    assert all(sample_arrivals(PoissonArrivalParams(0.0), rng) == 0 for _ in range(1000))


def test_poisson_mean_and_zero_mass():
    rng = np.random.default_rng(1)
    draws = np.array([sample_arrivals(PoissonArrivalParams(10.0), rng) for _ in range(10**6)])
    assert abs(draws.mean() - 10) < 0.05
    p0 = math.exp(-10)
    se = math.sqrt(p0 * (1 - p0) / draws.size)
    assert abs((draws == 0).mean() - p0) < 4 * se + 1e-6


@pytest.mark.parametrize("lam", [1.0, 10.0])
def test_poisson_dispersion(lam):
    draws = np.random.default_rng(2).poisson(lam, 10**6)
    assert draws.var() / draws.mean() == pytest.approx(1.0, abs=0.01)


def test_sampling_is_deterministic():
    a = [sample_arrivals(PoissonArrivalParams(25.0), np.random.default_rng(9)) for _ in range(3)]
    assert len(set(a)) == 1


def test_stability_margin(ref_arr):
    assert stability_margin(ref_arr, GilbertElliottParams(0.7, 0.3, 16)) == pytest.approx(1.2)
    assert stability_margin(ref_arr, GilbertElliottParams(0.7, 0.3, 14)) == pytest.approx(-0.2)
    assert stability_margin(PoissonArrivalParams(0.0), GilbertElliottParams(0.2, 0.6, 8)) == pytest.approx(2.0)
    # boundary at c = lambda (alpha + beta) / alpha
    c_crit = 10 * (0.7 + 0.3) / 0.7
    assert c_crit == pytest.approx(14.2857, abs=1e-4)
