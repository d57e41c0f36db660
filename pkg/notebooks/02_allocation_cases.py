"""
MQLA-ISL allocation cases
=========================

The allocator splits the orbit backlog Q between satellites that were Good
and Bad in the previous slot. Which case applies depends on the service gap
delta and on how large Q is.
"""

# %%
import numpy as np

from leobuf import ChannelState, GilbertElliottParams, PoissonArrivalParams, mqla_allocate
from leobuf.experiments import check_allocation, random_allocation_instance

G, B = ChannelState.GOOD, ChannelState.BAD
states = [G, G, B, B, B]

# %% Persistent channels: a Good satellite is likely to stay Good, delta > 0
sticky = GilbertElliottParams(alpha=0.1, beta=0.1, c=16)
for Q in (5, 30, 200):
    d = mqla_allocate(Q, states, sticky)
    print(f"delta={d.delta:+.1f} Q={Q:3d} case {d.case_tag:3s} targets={d.targets.tolist()}")

# %% Flipping channels: a Good satellite is likely to turn Bad, delta < 0
flippy = GilbertElliottParams(alpha=0.9, beta=0.9, c=16)
for Q in (5, 30, 200):
    d = mqla_allocate(Q, states, flippy)
    print(f"delta={d.delta:+.1f} Q={Q:3d} case {d.case_tag:3s} targets={d.targets.tolist()}")

# %% At the reference parameters delta = 0, so the split is even
d = mqla_allocate(47, states, GilbertElliottParams(0.7, 0.3, 16))
print("reference:", d.case_tag, d.targets.tolist())

# %% Spot check against a grid search
rng = np.random.default_rng(0)
gaps = []
for _ in range(100):
    Q, s, arr, ch = random_allocation_instance(rng)
    closed, brute, tags = check_allocation(Q, s, arr, ch)
    assert tags
    gaps.append(brute - closed)
print(f"grid minus closed form over 100 instances: min {min(gaps):.3g}, max {max(gaps):.3g}")
