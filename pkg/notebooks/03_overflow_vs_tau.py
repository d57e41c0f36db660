"""
Overflow probability versus threshold
=====================================

Simulate the three buffer policies at the reference parameters and compare
the no-ISL curve with the exact single-satellite solution and the bound.
"""

# %%
import numpy as np

from leobuf import (
    ConstellationConfig,
    PolicyKind,
    estimate_overflow,
    oracle_overflow,
    overflow_bound,
    run_replications,
    single_leo_stationary,
    solve_qos_exponent,
)

taus = tuple(range(10, 61, 5))
base = ConstellationConfig(slots=210_000, warmup_slots=10_000, thresholds=taus)
curves = {}
for policy in PolicyKind:
    stats = run_replications(base.replace(policy=policy), 2)
    curves[policy] = [estimate_overflow(stats, t)[0] for t in taus]

theta = solve_qos_exponent(base.arr, base.ch).theta_star
exact = single_leo_stationary(base.arr, base.ch)

# %%
print(" tau    no-isl    exact     bound     mqla      virtual")
for i, t in enumerate(taus):
    print(
        f"{t:4d}  {curves[PolicyKind.NO_ISL][i]:.3e} {oracle_overflow(exact, t):.3e} "
        f"{overflow_bound(theta, t):.3e} {curves[PolicyKind.MQLA_ISL][i]:.3e} "
        f"{curves[PolicyKind.VIRTUAL_QUEUE][i]:.3e}"
    )

# %% Decay rate of the simulated MQLA curve where it is still resolved
m = np.array(curves[PolicyKind.MQLA_ISL])
ok = m > 0
slope = np.polyfit(np.array(taus)[ok], np.log(m[ok]), 1)[0]
print(f"MQLA decay rate {-slope:.3f}; single satellite {theta:.4f}, pooled L*theta* {base.L * theta:.3f}")
