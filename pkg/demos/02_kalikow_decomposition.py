"""The convex finite-range decomposition of the spiking kernel.

At a site-time with no spontaneous spike, the kernel that looks back over
the whole window to the neuron's last spontaneous spike is split into a
mixture over interaction ranges k: with probability lam(k) the transition
only reads neurons V_i(k).  Range -1 reads nothing at all.  The mixture
weights depend on the realized spontaneous field; mixing the finite-range
kernels reproduces the true kernel exactly.
"""

import numpy as np

import spikechain as sc
from spikechain.kalikow import (
    SiteTimeContext,
    direct_kernel,
    lambda_bar,
    lambda_weights,
    p_k_conditional,
    reconstruct_transition,
)

spec = sc.ModelSpec(
    weights=np.array([[0.0, 0.7, 0.4],
                      [0.5, 0.0, 0.0],
                      [0.3, 0.6, 0.0]]),
    phi=sc.PhiDescriptor("sigmoid-floor", delta=0.5),
    g=sc.AgingDescriptor("constant-one"),
    neighborhoods=[
        [frozenset({0}), frozenset({0, 1}), frozenset({0, 1, 2})],
        [frozenset({1}), frozenset({0, 1})],
        [frozenset({2}), frozenset({1, 2}), frozenset({0, 1, 2})],
    ],
)

# a realized spontaneous window for neuron 0 at time 0, reaching back 4 steps
xi = np.array([
    [0, 0, 0, 1],   # target neuron: spontaneous spike exactly at the window start
    [1, 0, 1, 0],
    [0, 0, 0, 1],
], dtype=np.int8)
ctx = SiteTimeContext(neuron=0, time=0, xi_window=xi)

weights = lambda_weights(ctx, spec)
print("range weights lam(k):")
for k in sorted(weights.lam):
    print(f"  k={k:2d}: lam={weights.lam[k]:.6f}"
          + ("" if k < 1 else f"   (dominating bound {lambda_bar(ctx, spec, k):.6f})"))
print(f"sum: {sum(weights.lam.values()):.15f}")
print(f"certain bounds at range -1: spike >= {weights.r_minus1[0]:.4f}, "
      f"still >= {weights.r_minus1[1]:.4f}")

# a compatible history on the window (everything the spontaneous field forces,
# plus a few extra spikes)
x = {(j, s): int(xi[j, -s - 1]) for j in range(3) for s in (-1, -2, -3, -4)}
x[(1, -2)] = 1
x[(0, -2)] = 1

print()
print("finite-range kernels at this history:")
for k in sorted(weights.lam):
    if weights.lam[k] <= 0:
        continue
    p1, p0 = p_k_conditional(ctx, spec, k, x, weights)
    print(f"  k={k:2d}: p(spike)={p1:.6f}  p(still)={p0:.6f}")

d1, d0 = direct_kernel(ctx, spec, x)
print(f"true kernel:   p(spike)={d1:.6f}")
mix = sum(weights.lam[k] * p_k_conditional(ctx, spec, k, x, weights)[0]
          for k in sorted(weights.lam) if weights.lam[k] > 0)
print(f"mixture:       p(spike)={mix:.6f}")
print(f"reconstruction error: {reconstruct_transition(ctx, spec, x):.2e}")

print()
print("space-time variant (per-neuron deterministic weights):")
spec_st = sc.ModelSpec(
    weights=np.array([[0.0, 0.8], [0.5, 0.0]]),
    phi=sc.PhiDescriptor("saturated-linear", delta=0.4, gamma=0.1),
    g=sc.AgingDescriptor("finite-support", values=(1.0, 0.5)),
)
w_st = sc.spacetime_weights(spec_st, 0)
for k in sorted(w_st.lam):
    print(f"  k={k:2d}: lam={w_st.lam[k]:.6f}")
print(f"residual beyond k={w_st.k_max}: {w_st.residual_mass:.1e}")
