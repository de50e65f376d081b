"""Defining models and checking when the samplers are certified to work.

A model is a weight matrix, a spiking rate function with a spontaneous
floor, and an aging function weighting past presynaptic spikes.  Validation
computes the constants that control the backward sampler: the interaction
constant, the reproduction bound e(delta) of the ancestor process, and the
critical floor delta* where e crosses 1.
"""

import numpy as np

import spikechain as sc

print("== two mutually exciting neurons, one-step memory ==")
spec = sc.two_neuron_preset()
report = sc.validate_model(spec, horizon=10)
print(f"sup of in-weight sums : {report.summability_sup}")
print(f"interaction constant  : {report.C_gamma}")
print(f"e(delta) at delta={spec.delta}: {report.e_delta:.4f}")
print(f"critical floor delta* : {report.delta_star:.4f} ({report.delta_star_flag})")
print(f"space-time mean       : {report.m_sup:.4f}")
print(f"regime                : {report.regime}")

print()
print("== e(delta) is nonincreasing; the sampler needs delta above delta* ==")
for d in (0.65, 0.7, 0.75, 0.85, 0.95):
    print(f"  e({d:.2f}) = {sc.e_delta(spec, d):8.4f}")

print()
print("== fully connected triple with unbounded memory (g == 1) ==")
spec3 = sc.three_neuron_preset()
rep3 = sc.validate_model(spec3, horizon=10)
print(f"regime {rep3.regime}; e(delta) = {rep3.e_delta:.4f}; "
      f"delta* = {rep3.delta_star:.4f}")
print("with g == 1 the aging sums are not summable, so only the")
print("spontaneous-spikes route certifies existence")

print()
print("== lattice window preset: polynomially decaying weights ==")
lattice = sc.zd_window_preset(radius=3, alpha=2.0)
repl = sc.validate_model(lattice, horizon=8)
print(f"neurons: {lattice.neuron_count}; interaction constant {repl.C_gamma:.4f}")
print("(boundary neurons miss the weight mass outside the window)")

print()
print("== geometric memory-loss rate for exponentially fading models ==")
spec_e = sc.exponential_memory_preset()
res = sc.mgf_rho(spec_e, 2.0)
print(f"decay envelope constant C = {res.C}, step mass = {res.step_mass:.4f}")
print(f"rho = {res.value:.4f} (< 1 means geometric loss of memory)")
