import math

import numpy as np
import pytest

from spikechain.forward import (
    StateSpaceTooLarge,
    UnboundedMemory,
    drive_state,
    exact_stationary,
    initial_state,
    isi_moments,
    simulate,
    simulate_support1_batch,
    step,
)
from spikechain.models import (
    AgingDescriptor,
    ModelSpec,
    PhiDescriptor,
    independent_preset,
    two_neuron_preset,
)
from spikechain.rng import RandomCoordinateSource


def test_simulate_zero_horizon():
    f = simulate(independent_preset(2, 0.5), 0, 0, RandomCoordinateSource(1))
    assert f.data.shape == (2, 0)


def test_delta_one_all_spikes():
    f = simulate(independent_preset(3, 1.0), 50, 10, RandomCoordinateSource(2))
    assert np.all(f.data == 1)


def test_independent_rate():
    f = simulate(independent_preset(1, 0.3), 100_000, 100, RandomCoordinateSource(3))
    assert abs(f.rate() - 0.3) <= 3 * math.sqrt(0.21 / 100_000)


def test_one_step_conditional_marginals_all_states():
    """Empirical conditional spike frequencies match the rate plug-in for
    every configuration of the two-neuron chain."""
    spec = two_neuron_preset()
    g1 = spec.g[0](1)
    draws = 40_000
    for x in range(4):
        bits = np.array([x & 1, (x >> 1) & 1], dtype=np.int8)
        st = initial_state(spec)
        st.config = bits.copy()
        st.ring = [bits.copy()]
        st.ages = np.ones(2, dtype=np.int64)
        counts = np.zeros(2)
        src = RandomCoordinateSource(100 + x)
        for r in range(draws):
            st2 = step(st, spec, src.substream("d", r))
            counts += st2.config
        for i in (0, 1):
            target = float(spec.phi[i](spec.weights[i] @ (g1 * bits), 1))
            se = math.sqrt(max(target * (1 - target), 1e-6) / draws)
            assert abs(counts[i] / draws - target) <= 3.5 * se


def test_same_step_draws_conditionally_independent():
    spec = two_neuron_preset()
    draws = 40_000
    st = initial_state(spec)
    src = RandomCoordinateSource(5)
    a = np.zeros(draws)
    b = np.zeros(draws)
    for r in range(draws):
        st2 = step(st, spec, src.substream("i", r))
        a[r], b[r] = st2.config
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) <= 3 / math.sqrt(draws)


def test_rate_floor_invariant():
    spec = two_neuron_preset()
    rng = np.random.default_rng(0)
    st = initial_state(spec)
    for _ in range(200):
        st.config = rng.integers(0, 2, 2).astype(np.int8)
        st.counters = rng.uniform(0, 2, (2, 2))
        st.ages = rng.integers(1, 5, 2)
        arg = drive_state(st, spec)
        for i in (0, 1):
            assert float(spec.phi[i](arg[i], int(st.ages[i]))) >= spec.delta


def test_counter_recursion_matches_window_recomputation():
    """The exact accumulators for constant-one and exponential aging agree
    with a brute-force recomputation from the recorded history."""
    for g in (AgingDescriptor("constant-one"),
              AgingDescriptor("exponential", C=0.7, beta=0.9)):
        spec = ModelSpec(np.array([[0.0, 0.6], [0.8, 0.0]]),
                         PhiDescriptor("saturated-linear", delta=0.4, gamma=0.1),
                         g=g)
        src = RandomCoordinateSource(6)
        st = initial_state(spec)
        history = [st.config.copy()]  # configuration at time t-1
        for _ in range(60):
            st = step(st, spec, src)
            history.append(st.config.copy())
            arg = drive_state(st, spec)
            for i in (0, 1):
                age = int(st.ages[i])
                total = 0.0
                for lag in range(1, age + 1):
                    pos = len(history) - lag
                    if pos < 0:
                        break
                    cfg = history[pos]
                    for j in range(2):
                        total += spec.weights[i, j] * spec.g[j](lag) * cfg[j]
                assert arg[i] == pytest.approx(total, abs=1e-12)


def test_ring_plan_matches_direct_for_finite_support():
    spec = ModelSpec(np.array([[0.0, 0.5], [0.5, 0.0]]),
                     PhiDescriptor("saturated-linear", delta=0.4, gamma=0.1),
                     AgingDescriptor("finite-support", values=(1.0, 0.25, 0.5)))
    src = RandomCoordinateSource(7)
    st = initial_state(spec)
    history = [st.config.copy()]
    for _ in range(60):
        st = step(st, spec, src)
        history.append(st.config.copy())
        arg = drive_state(st, spec)
        for i in (0, 1):
            age = int(st.ages[i])
            total = 0.0
            for lag in range(1, min(age, 3) + 1):
                pos = len(history) - lag
                if pos < 0:
                    break
                cfg = history[pos]
                for j in range(2):
                    total += spec.weights[i, j] * spec.g[j](lag) * cfg[j]
            assert arg[i] == pytest.approx(total, abs=1e-12)


def test_power_law_cap_and_unbounded_memory():
    spec = ModelSpec(np.array([[0.0, 0.5], [0.5, 0.0]]),
                     PhiDescriptor("saturated-linear", delta=0.4, gamma=0.1),
                     AgingDescriptor("power-law", C=1.0, p=3.0))
    st = initial_state(spec, ring_cap=50)
    assert st._plan.ring_len == 50
    assert st.tail_error > 0
    slow = ModelSpec(np.array([[0.0, 0.5], [0.5, 0.0]]),
                     PhiDescriptor("saturated-linear", delta=0.4, gamma=0.1),
                     AgingDescriptor("power-law", C=1.0, p=1.2))
    with pytest.raises(UnboundedMemory):
        initial_state(slow)  # no cap below the ring limit meets the tolerance


def test_exact_stationary_one_neuron():
    oracle = exact_stationary(independent_preset(1, 0.3))
    assert oracle.stationary == pytest.approx([0.7, 0.3], abs=1e-12)
    mean_isi, cov = isi_moments(oracle, 0)
    assert mean_isi == pytest.approx(1 / 0.3, rel=1e-12)
    assert cov == pytest.approx(0.0, abs=1e-12)


def test_exact_stationary_two_neuron_hand_built():
    spec = two_neuron_preset()
    oracle = exact_stationary(spec)
    # independent hand-built operator
    import itertools

    delta, gamma, w = 0.75, 0.05, 1.0
    idx = list(itertools.product((0, 1), (0, 1)))  # (x0, x1)
    P = np.zeros((4, 4))
    for a, x in enumerate(idx):
        p0 = min(1, delta + gamma * w * x[1])
        p1 = min(1, delta + gamma * w * x[0])
        for b, y in enumerate(idx):
            P[a, b] = (p0 if y[0] else 1 - p0) * (p1 if y[1] else 1 - p1)
    # state encoding: bit i of the state is neuron i
    remap = [0, 2, 1, 3]  # (x0,x1) tuple order -> bit order
    P_lib = oracle.operator
    for a in range(4):
        for b in range(4):
            assert P_lib[remap[a], remap[b]] == pytest.approx(P[a, b], abs=1e-14)
    assert np.max(np.abs(oracle.stationary @ oracle.operator - oracle.stationary)) < 1e-10
    assert np.max(np.abs(oracle.operator.sum(axis=1) - 1.0)) < 1e-12


def test_kac_identity():
    for spec in (independent_preset(1, 0.3), two_neuron_preset(),
                 two_neuron_preset(delta=0.68, w=0.7, gamma=0.08)):
        oracle = exact_stationary(spec)
        for i in range(spec.neuron_count):
            mean_isi, _ = isi_moments(oracle, i)
            assert mean_isi * oracle.spike_rate(i) == pytest.approx(1.0, abs=1e-9)


def test_isi_moments_match_long_simulation():
    spec = two_neuron_preset()
    oracle = exact_stationary(spec)
    mean_o, cov_o = isi_moments(oracle, 0)
    f = simulate(spec, 300_000, 1000, RandomCoordinateSource(8))
    from spikechain.stats import adjacent_isi_covariance, extract_spikes

    times = extract_spikes(f, 0)
    est, se = adjacent_isi_covariance(times)
    assert abs(est - cov_o) <= 3.5 * se
    isi = np.diff(times)
    mean_se = isi.std() / math.sqrt(len(isi))
    assert abs(isi.mean() - mean_o) <= 3.5 * mean_se


def test_state_space_cap():
    with pytest.raises(StateSpaceTooLarge):
        exact_stationary(independent_preset(13, 0.5))


def test_oracle_requires_support1():
    with pytest.raises(UnboundedMemory):
        exact_stationary(ModelSpec(np.zeros((2, 2)),
                                   PhiDescriptor("sigmoid-floor", delta=0.5),
                                   AgingDescriptor("constant-one")))


def test_batch_simulator_matches_rate():
    spec = two_neuron_preset()
    stack = np.repeat(spec.weights[None, :, :], 50, axis=0)
    out = simulate_support1_batch(stack, spec.phi[0], 2000, 100,
                                  RandomCoordinateSource(9), track=0)
    oracle = exact_stationary(spec)
    target = oracle.spike_rate(0)
    n = out.size
    assert abs(out.mean() - target) <= 4 * math.sqrt(target * (1 - target) / n)


def test_step_is_pure():
    spec = ModelSpec(np.array([[0.0, 0.5], [0.5, 0.0]]),
                     PhiDescriptor("saturated-linear", delta=0.5, gamma=0.1),
                     AgingDescriptor("constant-one"))
    st = initial_state(spec)
    cfg = st.config.copy()
    cnt = st.counters.copy()
    step(st, spec, RandomCoordinateSource(10))
    assert np.array_equal(st.config, cfg)
    assert np.array_equal(st.counters, cnt)
