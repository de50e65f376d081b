import math

import numpy as np
import pytest

from spikechain.graphs import (
    SynapticGraph,
    estimate_tau_cdf,
    event_A,
    return_time_tau,
    sample_er_digraph,
    tau_tail_bound,
)
from spikechain.rng import RandomCoordinateSource


def test_edge_probability_formula():
    g = sample_er_digraph(100, 1.0, RandomCoordinateSource(1))
    assert g.p == pytest.approx(1.01 / 100)
    assert 99 * g.p == pytest.approx(0.9999)
    g2 = sample_er_digraph(2, 0.0, RandomCoordinateSource(1))
    assert g2.p == pytest.approx(0.5)


def test_no_self_loops_and_determinism():
    src = RandomCoordinateSource(2)
    for r in range(50):
        g = sample_er_digraph(30, 1.0, src, r)
        for i, targets in enumerate(g.out_edges):
            assert i not in set(int(t) for t in targets)
    a = sample_er_digraph(30, 1.0, RandomCoordinateSource(3), 5)
    b = sample_er_digraph(30, 1.0, RandomCoordinateSource(3), 5)
    assert all(np.array_equal(x, y) for x, y in zip(a.out_edges, b.out_edges))
    with pytest.raises(ValueError):
        SynapticGraph(2, 0.0, [np.array([0]), np.array([])])


def test_edge_count_moments():
    src = RandomCoordinateSource(4)
    n, theta, reps = 100, 0.0, 800
    counts = np.array([sample_er_digraph(n, theta, src, r).edge_count
                       for r in range(reps)])
    p = (1 + theta / n) / n
    mean = n * (n - 1) * p
    var = n * (n - 1) * p * (1 - p)
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(var / reps)


def test_per_pair_edge_frequency():
    src = RandomCoordinateSource(5)
    n, reps = 10, 4000
    hits = np.zeros((n, n))
    for r in range(reps):
        hits += sample_er_digraph(n, 0.0, src, r).adjacency()
    p = 1 / n
    se = math.sqrt(p * (1 - p) / reps)
    off = ~np.eye(n, dtype=bool)
    assert np.all(np.abs(hits[off] / reps - p) <= 4.5 * se)
    assert np.all(hits[~off] == 0)


def test_return_time_examples():
    # two-cycle through 0
    g = SynapticGraph(3, 0.0, [np.array([1]), np.array([0]), np.array([], dtype=int)])
    assert return_time_tau(g, 0, 5) == 2
    empty = SynapticGraph(3, 0.0, [np.array([], dtype=int)] * 3)
    assert return_time_tau(empty, 0, 10) is None
    assert event_A(empty, 0)
    assert not event_A(g, 0, 1)


def test_return_time_matches_matrix_power_oracle():
    src = RandomCoordinateSource(6)
    for r in range(1000):
        n = 8
        g = sample_er_digraph(n, 1.0, src, r)
        a = g.adjacency().astype(bool)
        power = a.copy()
        oracle = None
        for k in range(1, 9):
            if k > 1:
                power = power @ a
            if power[0, 0]:
                oracle = k
                break
        assert return_time_tau(g, 0, 8) == oracle


def test_tau_tail_bound_values():
    assert tau_tail_bound(50, 0.0, 5) == pytest.approx(0.08, abs=1e-15)
    assert tau_tail_bound(100, 1.0, 10) == pytest.approx(0.09946538262680829, rel=1e-12)
    assert tau_tail_bound(100, 0.0, 1) == 0.0


def test_estimate_tau_cdf_against_bound():
    src = RandomCoordinateSource(7)
    est, se = estimate_tau_cdf(50, 0.0, 5, 1500, src)
    assert est <= tau_tail_bound(50, 0.0, 5) + 3 * se
    est1, _ = estimate_tau_cdf(50, 0.0, 1, 200, src)
    assert est1 == 0.0
    with pytest.raises(ValueError):
        estimate_tau_cdf(50, 0.0, 5, 10, src)


def test_tau_cdf_monotone_in_k():
    src = RandomCoordinateSource(8)
    taus = []
    for r in range(800):
        g = sample_er_digraph(40, 0.5, src, r)
        taus.append(return_time_tau(g, 0, 12))
    cdf = [sum(1 for t in taus if t is not None and t <= k) for k in range(1, 13)]
    assert all(b >= a for a, b in zip(cdf, cdf[1:]))


def test_event_a_mass_bound():
    src = RandomCoordinateSource(9)
    n, reps = 100, 1500
    k_n = int(math.isqrt(n))
    not_a = sum(0 if event_A(sample_er_digraph(n, 0.0, src, r), 0, k_n) else 1
                for r in range(reps))
    p_hat = not_a / reps
    se = math.sqrt(max(p_hat * (1 - p_hat), 1 / reps) / reps)
    assert p_hat <= n ** -0.5 + 3 * se


def test_edge_list_csv():
    g = SynapticGraph(3, 0.5, [np.array([1, 2]), np.array([2]), np.array([], dtype=int)])
    assert g.edge_list_csv() == "src,dst\n0,1\n0,2\n1,2\n"
