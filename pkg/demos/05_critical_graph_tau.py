"""Critical directed random synaptic graphs and information return times.

At edge probability (1 + theta/N)/N the graph sits at the connectivity
threshold.  The return time tau of a neuron is the length of the shortest
directed cycle through it; its distribution obeys the closed-form tail
bound (k-1)/N * exp(theta k / N), and feedback shorter than 2 sqrt(N) is
unlikely: the mass of such graphs is at most exp(2 theta)/sqrt(N).
"""

import math

import spikechain as sc
from spikechain.rng import RandomCoordinateSource

src = RandomCoordinateSource(5)

print("== one sampled graph ==")
g = sc.sample_er_digraph(30, 1.0, src)
print(f"N={g.n}, theta={g.theta}, p={g.p:.5f}, edges={g.edge_count}")
tau = sc.return_time_tau(g, 0, 30)
print(f"return time of neuron 0: {tau if tau is not None else '> 30'}")
print(f"no short feedback (event A): {sc.event_A(g, 0)}")

print()
print("== tail bound vs Monte Carlo ==")
n, theta, reps = 100, 0.0, 4000
print(f"N={n}, theta={theta}, {reps} graphs:")
print(f"{'k':>3} {'estimate':>10} {'bound':>10}")
for k in (2, 4, 6, 8, 10):
    est, se = sc.estimate_tau_cdf(n, theta, k, reps, src.substream("cdf", k))
    print(f"{k:>3} {est:>10.4f} {sc.tau_tail_bound(n, theta, k):>10.4f}")

print()
print("== mass of graphs with short feedback ==")
for n in (50, 100, 200):
    k_n = int(math.isqrt(n))
    not_a = sum(
        0 if sc.event_A(sc.sample_er_digraph(n, 0.0, src, 10_000 + r), 0, k_n) else 1
        for r in range(3000)
    )
    print(f"N={n:>4}: P(feedback <= 2 sqrt(N)) = {not_a / 3000:.4f}  "
          f"(bound {n ** -0.5:.4f})")
