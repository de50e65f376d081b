"""Loss of memory: how fast the chain forgets an artificial past.

Two coupled runs start from extremal pasts (everyone just spiked vs a long
quiet stretch) and share all step noise; the difference in spike
probability at time s is bounded by c/(s-1), and decays geometrically for
exponentially fading memory.
"""

import math

import spikechain as sc
from spikechain.rng import RandomCoordinateSource

print("== unbounded memory (g == 1), 3 neurons ==")
spec = sc.three_neuron_preset()
prof = sc.loss_of_memory_profile(spec, 0, range(2, 15), 15, 100_000,
                                 RandomCoordinateSource(1))
anchor = prof.anchor_constant
print(f"{'s':>3} {'difference':>12} {'c/(s-1)':>10}")
for s, d, b in zip(prof.s_grid, prof.differences, prof.inverse_bound):
    print(f"{s:>3} {d:>12.5f} {b:>10.5f}")
print(f"proof-level constant 2/(1 - e(delta)) = "
      f"{2 / (1 - sc.e_delta(spec, spec.delta)):.2f}")

print()
print("== exponentially fading memory ==")
spec_e = sc.exponential_memory_preset()
rho = sc.mgf_rho(spec_e, 2.0)
prof_e = sc.loss_of_memory_profile(spec_e, 0, range(2, 9), 9, 400_000,
                                   RandomCoordinateSource(2))
print(f"{'s':>3} {'difference':>12}")
for s, d in zip(prof_e.s_grid, prof_e.differences):
    print(f"{s:>3} {d:>12.6f}")
print(f"fitted log-slope: {prof_e.log_slope:.3f} over {prof_e.slope_points} points")
print(f"geometric rate bound log(rho) = {math.log(rho.value):.3f} "
      f"(rho = {rho.value:.4f})")
