import math

import numpy as np
import pytest

from spikechain.models import (
    AgingDescriptor,
    MalformedSpec,
    ModelSpec,
    PhiDescriptor,
    exponential_memory_preset,
    graph_model,
    independent_preset,
    three_neuron_preset,
    two_neuron_preset,
    zd_window_preset,
)


def test_phi_families_respect_floor_and_cap():
    for phi in (
        PhiDescriptor("saturated-linear", delta=0.3, gamma=0.2),
        PhiDescriptor("sigmoid-floor", delta=0.3),
        PhiDescriptor("age-modulated", delta=0.3, age_a=0.5, age_b=0.5),
    ):
        s = np.linspace(-5, 50, 200)
        for n in (1, 3, 10):
            v = phi(s, n)
            assert np.all(v >= 0.3 - 1e-15)
            assert np.all(v <= 1.0 + 1e-15)
            assert np.all(np.diff(v) >= -1e-15)  # monotone in the input


def test_phi_lipschitz_constant():
    phi = PhiDescriptor("sigmoid-floor", delta=0.4)
    assert phi.lipschitz == pytest.approx(0.6)
    s = np.linspace(0, 10, 1000)
    v = phi(s)
    assert np.max(np.abs(np.diff(v)) / np.diff(s)) <= phi.lipschitz + 1e-12


def test_aging_families():
    g1 = AgingDescriptor("constant-one")
    assert g1(5) == 1.0 and g1.cumulative(5) == 5.0 and math.isinf(g1.total())
    ge = AgingDescriptor("exponential", C=1.0, beta=math.log(2))
    assert ge.cumulative(3) == pytest.approx(0.875, abs=1e-15)
    assert ge.total() == pytest.approx(1.0, abs=1e-12)
    assert ge.tail(2) == pytest.approx(0.5, abs=1e-12)
    gf = AgingDescriptor("finite-support", values=(1.0,))
    assert gf(1) == 1.0 and gf(2) == 0.0 and gf.cumulative(7) == 1.0
    gp = AgingDescriptor("power-law", C=1.0, p=2.0)
    assert gp(2) == 0.25
    assert gp.total() == pytest.approx(math.pi ** 2 / 6, rel=1e-12)
    assert gp.tail(3) == pytest.approx(gp.total() - 1.25, rel=1e-9)


def test_malformed_specs_raise():
    with pytest.raises(MalformedSpec):
        PhiDescriptor("saturated-linear", delta=0.0)
    with pytest.raises(MalformedSpec):
        AgingDescriptor("exponential", beta=-1.0)
    with pytest.raises(MalformedSpec):
        ModelSpec(weights=np.array([[1.0]]), phi=PhiDescriptor("sigmoid-floor", delta=0.5),
                  g=AgingDescriptor("constant-one"))  # nonzero diagonal
    with pytest.raises(MalformedSpec):
        ModelSpec(weights=np.zeros((2, 2)),
                  phi=PhiDescriptor("sigmoid-floor", delta=0.5),
                  g=AgingDescriptor("constant-one"),
                  neighborhoods=[[frozenset({0, 1})], [frozenset({1})]])  # V(0) != {i}


def test_neighborhood_defaults_and_queries():
    spec = two_neuron_preset()
    assert spec.v(0, -1) == frozenset()
    assert spec.v(0, 0) == frozenset({0})
    assert spec.v(0, 1) == frozenset({0, 1})
    assert spec.v(0, 99) == frozenset({0, 1})
    assert spec.k_sat(0) == 1
    assert spec.residual_weight(0, 0) == pytest.approx(1.0)
    assert spec.residual_weight(0, 1) == 0.0
    assert spec.attractive


def test_growing_neighborhoods_must_not_stall():
    w = np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    seq0 = [frozenset({0}), frozenset({0, 1}), frozenset({0, 1}), frozenset({0, 1, 2})]
    with pytest.raises(MalformedSpec):
        ModelSpec(weights=w, phi=PhiDescriptor("sigmoid-floor", delta=0.5),
                  g=AgingDescriptor("constant-one"),
                  neighborhoods=[seq0, [frozenset({1})], [frozenset({2})]])


def test_summability_sup():
    spec = three_neuron_preset(w=0.3)
    assert spec.summability_sup() == pytest.approx(0.6)


def test_spec_hash_stable_and_sensitive():
    a = two_neuron_preset()
    b = two_neuron_preset()
    c = two_neuron_preset(delta=0.76)
    assert a.spec_hash() == b.spec_hash()
    assert a.spec_hash() != c.spec_hash()


def test_presets_well_formed():
    for spec in (independent_preset(3, 0.4), two_neuron_preset(), three_neuron_preset(),
                 exponential_memory_preset(), zd_window_preset(radius=2)):
        assert spec.neuron_count >= 1
        assert np.all(np.diag(spec.weights) == 0.0)


def test_zd_window_weights_and_balls():
    spec = zd_window_preset(radius=2, alpha=2.0)
    # center neuron index 2; |i-j|=1 -> 1, |i-j|=2 -> 2^-4
    assert spec.weights[2, 1] == pytest.approx(1.0)
    assert spec.weights[2, 0] == pytest.approx(2.0 ** -4)
    assert spec.v(2, 1) == frozenset({1, 2, 3})
    assert spec.v(2, 2) == frozenset({0, 1, 2, 3, 4})


def test_graph_model_orientation():
    adj = np.zeros((3, 3), dtype=int)
    adj[0, 1] = 1  # edge 0 -> 1
    spec = graph_model(adj, delta=0.5, gamma=0.1)
    assert spec.weights[1, 0] == 1.0  # neuron 1 receives from 0
    assert spec.weights[0, 1] == 0.0
