"""Forward simulation and the exact small-system oracle.

Forward runs approximate stationarity only after burn-in, but they scale;
for one-step memory the configuration chain is a finite Markov chain, so
stationary laws and inter-spike-interval moments come from linear solves
and calibrate everything else.
"""

import numpy as np

import spikechain as sc
from spikechain.rng import RandomCoordinateSource

spec = sc.two_neuron_preset()
oracle = sc.exact_stationary(spec)

print("== exact oracle (4-state chain) ==")
print(f"stationary law: {np.array2string(oracle.stationary, precision=5)}")
print(f"spike rates   : {[round(oracle.spike_rate(i), 5) for i in (0, 1)]}")
mean_isi, cov = sc.isi_moments(oracle, 0)
print(f"mean interval : {mean_isi:.6f}   (Kac: rate * mean = "
      f"{mean_isi * oracle.spike_rate(0):.10f})")
print(f"adjacent-interval covariance: {cov:.6e}")

print()
print("== long forward run vs the oracle ==")
field = sc.simulate(spec, 200_000, 1000, RandomCoordinateSource(1))
times = sc.extract_spikes(field, 0)
stats = sc.spike_train_stats(times)
print(f"empirical rate     : {field.rate(0):.5f}")
print(f"empirical mean ISI : {stats.mean_isi:.5f} +- {stats.mean_isi_se:.5f}")
print(f"empirical adj. cov : {stats.adjacent_cov:.3e} +- {stats.adjacent_cov_se:.3e}")
print(f"(exact value {cov:.3e} sits inside the interval)")

print()
print("== memory handling ==")
print("constant-one and exponential aging run on exact O(N^2) recursions;")
print("finite-support aging reads a ring of recent configurations:")
spec_exp = sc.exponential_memory_preset()
f2 = sc.simulate(spec_exp, 20_000, 200, RandomCoordinateSource(2))
print(f"exponential-memory model rate: {f2.rate():.4f}")
