"""
QoS exponent and buffer sizing
==============================

Solve for the tail exponent of one satellite, then see how pooling L
buffers scales it and how much buffer a 1e-4 overflow target needs.
"""

# %%
from leobuf import (
    GilbertElliottParams,
    PoissonArrivalParams,
    overflow_bound,
    required_buffer,
    solve_qos_exponent,
    stability_margin,
    virtual_queue_exponent,
)

arr = PoissonArrivalParams(10.0)
ch = GilbertElliottParams(alpha=0.7, beta=0.3, c=16)
print("stability margin c*pi_good - lambda =", stability_margin(arr, ch))

sol = solve_qos_exponent(arr, ch)
print(f"theta* = {sol.theta_star:.6f}  (residual {sol.residual:.1e}, {sol.iterations} bisection steps)")

# %% Buffer needed for a 1e-4 overflow target
for L in (1, 2, 5, 10):
    theta = virtual_queue_exponent(sol.theta_star, L)
    print(f"L={L:2d}  exponent={theta:.4f}  buffer for 1e-4: {required_buffer(theta, 1e-4):4d}")

# %% The bound e^{-theta tau} at a few thresholds
for tau in (20, 40, 100, 259):
    print(f"tau={tau:3d}  bound={overflow_bound(sol.theta_star, tau):.3e}")

# %% Moving c toward the stability boundary flattens the tail
for c in (15, 16, 18, 22):
    g = GilbertElliottParams(0.7, 0.3, c)
    print(f"c={c}  theta*={solve_qos_exponent(arr, g).theta_star:.4f}")
