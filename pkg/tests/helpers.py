"""Shared random-instance generators for the test suite."""

import numpy as np

from spikechain.kalikow import SiteTimeContext
from spikechain.models import AgingDescriptor, ModelSpec, PhiDescriptor


def random_attractive_instance(rng, n_max=5, g_families=("constant-one", "finite-support")):
    """A random attractive model with a staged neighborhood sequence, plus a
    random spontaneous-field context for neuron 0 and a compatible history
    window.  Returns (spec, ctx, x)."""
    n = int(rng.integers(2, n_max + 1))
    w = rng.uniform(0, 1.2, size=(n, n))
    np.fill_diagonal(w, 0.0)
    fam = rng.choice(["saturated-linear", "sigmoid-floor", "age-modulated"])
    delta = float(rng.uniform(0.3, 0.8))
    if fam == "saturated-linear":
        phi = PhiDescriptor(fam, delta=delta, gamma=float(rng.uniform(0.01, 0.2)))
    elif fam == "sigmoid-floor":
        phi = PhiDescriptor(fam, delta=delta)
    else:
        phi = PhiDescriptor(fam, delta=delta, age_a=float(rng.uniform(0, 0.9)),
                            age_b=float(rng.uniform(0.2, 0.9)))
    if rng.choice(g_families) == "constant-one":
        g = AgingDescriptor("constant-one")
    else:
        vals = tuple(rng.uniform(0.01, 1.0, size=int(rng.integers(1, 4))))
        g = AgingDescriptor("finite-support", values=vals)
    neigh = []
    for i in range(n):
        inn = sorted(set(int(j) for j in np.nonzero(w[i])[0]) - {i})
        seq = [frozenset({i})]
        acc = {i}
        for j in inn:
            acc = acc | {j}
            seq.append(frozenset(acc))
        neigh.append(seq)
    spec = ModelSpec(weights=w, phi=phi, g=g, neighborhoods=neigh)
    age = int(rng.integers(1, 7))
    t = int(rng.integers(-3, 4))
    xi = (rng.random((n, age)) < delta).astype(np.int8)
    xi[0, :] = 0
    xi[0, age - 1] = 1
    ctx = SiteTimeContext(neuron=0, time=t, xi_window=xi)
    x = {}
    for j in range(n):
        for lag in range(1, age + 1):
            x[(j, t - lag)] = 1 if xi[j, lag - 1] else int(rng.random() < 0.5)
    return spec, ctx, x
