"""
Parameter trends at tau = 30
============================

Sweep the Good-state rate c, the orbit size L and the two channel transition
probabilities, using the experiment layer that backs the CLI.
"""

# %%
from leobuf import ConstellationConfig, ExperimentKind, ExperimentSpec, run_experiment

base = ConstellationConfig(slots=60_000, warmup_slots=10_000, thresholds=(30,))


def show(kind, values):
    res = run_experiment(ExperimentSpec(kind, base=base, values=values, replications=2))
    table = {}
    for var, value, policy, tau, p, ci, n in res.rows:
        table.setdefault(value, {})[policy] = p
    print(f"{res.rows[0][0]:>6}   no-isl     virtual    mqla")
    for value, row in table.items():
        print(f"{value:>6}   {row['no-isl']:.3e}  {row['virtual']:.3e}  {row['mqla']:.3e}")
    print()


# %% Larger c means more service per Good slot (c = 14 is unstable)
show(ExperimentKind.SWEEP_C, (14, 16, 18, 20, 22))

# %% Pooling helps more as the orbit grows; no-ISL satellites do not notice L
show(ExperimentKind.SWEEP_L, (2, 5, 10, 20))

# %% Faster recovery from Bad weather helps
show(ExperimentKind.SWEEP_ALPHA, (0.6, 0.7, 0.8, 0.9))

# %% More frequent Bad weather hurts
show(ExperimentKind.SWEEP_BETA, (0.1, 0.2, 0.3, 0.4))
