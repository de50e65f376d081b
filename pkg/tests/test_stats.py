import math

import numpy as np
import pytest

from spikechain.fields import SpikeField
from spikechain.graphs import SynapticGraph, sample_er_digraph, return_time_tau
from spikechain.models import independent_preset, three_neuron_preset
from spikechain.rng import RandomCoordinateSource
from spikechain.stats import (
    ConditioningTooRare,
    TooFewSpikes,
    adjacent_isi_covariance,
    extract_spikes,
    locality_check,
    loss_of_memory_profile,
    spike_train_stats,
    theorem4_bound,
    theorem4_experiment,
)


def test_extract_spikes_basics_and_round_trip():
    data = np.zeros((2, 5), dtype=np.int8)
    data[0] = [1, 1, 1, 1, 1]
    f = SpikeField((0, 1), 1, 6, data)
    assert list(extract_spikes(f, 0)) == [1, 2, 3, 4, 5]
    assert list(extract_spikes(f, 1)) == []
    rng = np.random.default_rng(0)
    data = (rng.random((2, 40)) < 0.4).astype(np.int8)
    f = SpikeField((0, 1), 0, 40, data)
    times = extract_spikes(f, 1)
    rebuilt = np.zeros(40, dtype=np.int8)
    rebuilt[times] = 1
    assert np.array_equal(rebuilt, f.column(1))


def test_period2_covariance_exact():
    times = np.cumsum([0] + [2, 8] * 600)
    est, se = adjacent_isi_covariance(times)
    assert est == pytest.approx(-9.0, abs=1e-9)


def test_renewal_stream_covariance_null():
    # coverage of the 3-sigma interval on 100 independent renewal streams
    rng = np.random.default_rng(1)
    fails = 0
    for rep in range(100):
        isi = rng.geometric(0.3, size=6000)
        times = np.cumsum(isi)
        est, se = adjacent_isi_covariance(times)
        if abs(est) > 3 * se:
            fails += 1
    assert fails <= 5  # at least 95% coverage


def test_too_few_spikes():
    with pytest.raises(TooFewSpikes):
        adjacent_isi_covariance(np.arange(50))


def test_spike_train_stats_consistency():
    rng = np.random.default_rng(2)
    times = np.cumsum(rng.geometric(0.4, size=5000))
    st = spike_train_stats(times)
    assert st.mean_isi == pytest.approx(np.diff(times).mean(), rel=1e-12)
    assert st.batch_count == 20
    assert abs(st.mean_isi - 2.5) <= 4 * st.mean_isi_se


def test_theorem4_bound_values_and_shape():
    assert theorem4_bound(100, 0.5) == pytest.approx(1.171875, abs=1e-12)
    assert theorem4_bound(10_000, 0.3) == pytest.approx(1.0781588365415860e-10, rel=1e-9)
    assert theorem4_bound(100, 1.0) == 0.0
    for n in (100, 400):
        grid = np.linspace(0.2, 0.9, 8)
        vals = [theorem4_bound(n, float(d)) for d in grid]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    decay = [theorem4_bound(n, 0.4) for n in (10 ** 2, 10 ** 4, 10 ** 6)]
    assert decay[0] > decay[1] > decay[2]
    assert decay[2] < 1e-100


def test_theorem4_experiment_small():
    rep = theorem4_experiment(20, 0.0, 0.5, 0.3, reps=40, horizon=20_000,
                              src=RandomCoordinateSource(3), burnin=200)
    assert rep.a_graphs + round(rep.p_ac * rep.graphs) == rep.graphs
    assert rep.bound == theorem4_bound(20, 0.5)
    assert len(rep.cov_estimates) == len(rep.cov_ses)
    for c, s in zip(rep.cov_estimates, rep.cov_ses):
        assert abs(c) <= rep.bound + 3 * s


def test_empty_graph_slice_is_renewal():
    """The zero-interaction slice: covariance of an isolated neuron is zero
    within its confidence interval."""
    from spikechain.forward import simulate

    f = simulate(independent_preset(1, 0.5), 150_000, 100, RandomCoordinateSource(4))
    est, se = adjacent_isi_covariance(extract_spikes(f, 0))
    assert abs(est) <= 3 * se


def test_locality_empty_graph_agrees():
    empty = SynapticGraph(4, 0.0, [np.array([], dtype=int)] * 4)
    rep = locality_check(empty, 0, k=2, l=2, delta=0.5, gamma=0.3, reps=40,
                         src=RandomCoordinateSource(5), horizon=4000)
    assert rep.applicable
    assert rep.passed
    assert rep.max_gap <= rep.max_gap_limit


def test_locality_short_cycle_not_applicable():
    g = SynapticGraph(3, 0.0, [np.array([1]), np.array([0]), np.array([], dtype=int)])
    rep = locality_check(g, 0, k=1, l=1, delta=0.5, gamma=0.3, reps=20,
                         src=RandomCoordinateSource(6), horizon=3000)
    assert not rep.applicable
    assert rep.tau == 2
    assert rep.passed  # vacuous: the containment makes no claim here


def test_locality_never_fires_on_certified_graphs():
    src = RandomCoordinateSource(7)
    graphs = []
    for r in range(400):
        g = sample_er_digraph(30, 0.0, src, r)
        if return_time_tau(g, 0, 4) is None and len(g.out_edges[0]) > 0:
            graphs.append(g)
        if len(graphs) == 4:
            break
    assert len(graphs) == 4
    for idx, graph in enumerate(graphs):
        rep = locality_check(graph, 0, k=2, l=2, delta=0.5, gamma=0.3, reps=60,
                             src=RandomCoordinateSource(80 + idx), horizon=5000)
        assert rep.applicable
        assert rep.passed
        assert rep.seed == 80 + idx


def test_locality_conditioning_too_rare():
    empty = SynapticGraph(2, 0.0, [np.array([], dtype=int)] * 2)
    with pytest.raises(ConditioningTooRare):
        locality_check(empty, 0, k=6, l=6, delta=0.9, gamma=0.1, reps=4,
                       src=RandomCoordinateSource(9), horizon=500)


def test_loss_of_memory_zero_interaction_is_exactly_coupled():
    spec = independent_preset(2, 0.4)
    prof = loss_of_memory_profile(spec, 0, range(1, 8), 8, 4000,
                                  RandomCoordinateSource(10))
    assert all(d == 0.0 for d in prof.differences)


def test_loss_of_memory_profile_three_neuron():
    spec = three_neuron_preset()
    prof = loss_of_memory_profile(spec, 0, range(2, 13), 13, 50_000,
                                  RandomCoordinateSource(11))
    assert prof.differences[0] > 5 * prof.ses[0]  # real signal at the anchor
    for s, d, se in zip(prof.s_grid, prof.differences, prof.ses):
        assert d <= prof.anchor_constant / (s - 1) + 3 * se
    assert prof.spec_hash == spec.spec_hash()
    assert prof.seed == 11
