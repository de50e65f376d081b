import math

import numpy as np
import pytest

from spikechain.analysis import (
    C_gamma,
    E_G_delta,
    G_cumulative,
    RegimeMismatch,
    SeriesDiverges,
    delta_star,
    e_delta,
    lambda_spacetime_bound,
    memory_loss_constant,
    mgf_rho,
    reproduction_mean,
    validate_model,
)
from spikechain.manifest import canonical_json
from spikechain.models import (
    AgingDescriptor,
    ModelSpec,
    PhiDescriptor,
    exponential_memory_preset,
    independent_preset,
    two_neuron_preset,
    zd_window_preset,
)


def _series_oracle(c_gamma: float, delta: float, g_of, n_max: int = 4000) -> float:
    """Independent brute-force evaluation of the reproduction bound:
    C * (1-d) * (G(1) + sum (1-d)^(n-2) n^2 G(n)) with G by direct summation."""
    total = g_of(1)
    G = g_of(1)
    for n in range(2, n_max):
        G += g_of(n)
        total += (1 - delta) ** (n - 2) * n * n * G
    return c_gamma * (1 - delta) * total


def two_neuron_unit(gamma=0.1):
    return ModelSpec(
        weights=np.array([[0.0, 1.0], [1.0, 0.0]]),
        phi=PhiDescriptor("saturated-linear", delta=0.9, gamma=gamma),
        g=AgingDescriptor("constant-one"),
    )


def test_g_cumulative_examples():
    spec = two_neuron_unit()
    assert G_cumulative(spec, 5) == 5.0  # constant-one: G(n) = n
    gf = ModelSpec(np.zeros((1, 1)), PhiDescriptor("sigmoid-floor", delta=0.5),
                   AgingDescriptor("finite-support", values=(1.0,)))
    assert G_cumulative(gf, 7) == 1.0
    ge = ModelSpec(np.zeros((1, 1)), PhiDescriptor("sigmoid-floor", delta=0.5),
                   AgingDescriptor("exponential", C=1.0, beta=math.log(2)))
    assert G_cumulative(ge, 3) == pytest.approx(0.875, abs=1e-14)
    ns = np.arange(1, 30)
    vals = [G_cumulative(spec, int(n)) for n in ns]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_e_delta_frozen_value_and_oracle():
    spec = two_neuron_unit()
    # frozen: C_gamma = 0.4, E(G, 0.9) = 12.490626428898034 for g == 1
    got = e_delta(spec, 0.9)
    assert got == pytest.approx(0.49962505715592135, rel=1e-10)
    oracle = _series_oracle(0.4, 0.9, lambda n: 1.0)
    assert got == pytest.approx(oracle, rel=1e-10)


def test_e_delta_single_dominating_edge():
    # one directed edge of weight 1 into neuron 1, gamma = 0.05 -> C_gamma = 0.2
    w = np.zeros((2, 2))
    w[1, 0] = 1.0
    spec = ModelSpec(w, PhiDescriptor("saturated-linear", delta=0.9, gamma=0.05),
                     AgingDescriptor("constant-one"))
    assert C_gamma(spec) == pytest.approx(0.2)
    assert e_delta(spec, 0.9) == pytest.approx(0.24981252857796068, rel=1e-10)


def test_e_delta_trivial_cases():
    free = independent_preset(3, 0.4)
    assert C_gamma(free) == 0.0
    for d in (0.1, 0.5, 0.9):
        assert e_delta(free, d) == 0.0
    spec = two_neuron_unit()
    assert e_delta(spec, 1.0) == 0.0


def test_e_delta_truncation_error_reported():
    spec = two_neuron_unit()
    value, err = E_G_delta(spec, 0.7)
    assert err <= 1e-10 * max(1.0, value)
    direct = _series_oracle(1.0, 0.7, lambda n: 1.0) / 0.3
    assert value == pytest.approx(direct, rel=1e-9)


def test_e_delta_diverges_near_zero():
    spec = two_neuron_unit()
    with pytest.raises(SeriesDiverges):
        E_G_delta(spec, 1e-9)


def test_delta_star_crossing_and_flags():
    spec = two_neuron_unit()
    ds = delta_star(spec, tol=1e-9)
    assert ds.flag == "crossing"
    assert e_delta(spec, ds.value) <= 1.0
    assert e_delta(spec, ds.value - 1e-6) > 1.0
    free = independent_preset(2, 0.5)
    assert delta_star(free).flag == "all-subcritical"
    assert delta_star(free).value == 0.0
    heavy = ModelSpec(np.array([[0.0, 1e6], [1e6, 0.0]]),
                      PhiDescriptor("saturated-linear", delta=0.5, gamma=0.9),
                      AgingDescriptor("constant-one"))
    assert delta_star(heavy).flag == "no-crossing-below-one"
    assert delta_star(heavy).value == pytest.approx(1.0 - 1e-6)


def test_e_delta_monotone_in_delta_random_specs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        w = rng.uniform(0, 1, (n, n))
        np.fill_diagonal(w, 0.0)
        spec = ModelSpec(w, PhiDescriptor("saturated-linear", delta=0.5,
                                          gamma=float(rng.uniform(0.01, 0.3))),
                         AgingDescriptor("finite-support", values=(1.0,)))
        d1, d2 = sorted(rng.uniform(0.3, 0.99, 2))
        assert e_delta(spec, d1) >= e_delta(spec, d2) - 1e-12


def test_delta_star_grid_property():
    spec = two_neuron_preset()
    ds = delta_star(spec).value
    for d in np.linspace(ds, 0.999, 50):
        assert e_delta(spec, float(d)) <= 1.0 + 1e-6


def test_reproduction_mean_examples():
    free = independent_preset(2, 0.5)
    for i in range(2):
        val, mode = reproduction_mean(free, i)
        assert val == 0.0
    # single in-edge of weight w, support-1 value v: bound = 5 * gamma * w * v
    w = np.zeros((2, 2))
    w[0, 1] = 0.8
    spec = ModelSpec(w, PhiDescriptor("saturated-linear", delta=0.5, gamma=0.1),
                     AgingDescriptor("finite-support", values=(0.5,)))
    bound, mode = reproduction_mean(spec, 0, exact=False)
    assert mode == "bound"
    assert bound == pytest.approx(5 * 0.1 * 0.8 * 0.5, rel=1e-12)
    exact, mode = reproduction_mean(spec, 0, exact=True)
    assert mode == "exact"
    assert exact <= bound + 1e-12


def test_reproduction_mean_matches_interaction_condition():
    # the bound-mode mean equals gamma times the space-time interaction sum
    w = np.zeros((2, 2))
    w[0, 1] = 0.6
    spec = ModelSpec(w, PhiDescriptor("saturated-linear", delta=0.5, gamma=0.2),
                     AgingDescriptor("exponential", C=0.5, beta=1.5))
    i = 0
    lhs = lambda_spacetime_bound(spec, i, 0)
    for k in range(1, 60):
        lhs += (k + 1) * len(spec.v(i, k)) * lambda_spacetime_bound(spec, i, k)
    got, _ = reproduction_mean(spec, i, exact=False)
    assert got == pytest.approx(lhs, rel=1e-8)


def test_reproduction_mean_regime_mismatch():
    aged = ModelSpec(np.zeros((1, 1)),
                     PhiDescriptor("age-modulated", delta=0.5, age_a=0.5, age_b=0.5),
                     AgingDescriptor("finite-support", values=(1.0,)))
    with pytest.raises(RegimeMismatch):
        reproduction_mean(aged, 0)
    nonsummable = two_neuron_unit()
    with pytest.raises(RegimeMismatch):
        reproduction_mean(nonsummable, 0)


def test_mgf_rho_limit_and_frozen_value():
    spec = exponential_memory_preset(beta=30.0, g_scale=1.0)
    res = mgf_rho(spec, 30.0)
    assert res.value == pytest.approx(math.exp(-1), abs=1e-8)
    # envelope constant 1 at rate 5 via unit exponential aging
    spec5 = exponential_memory_preset(beta=5.0, g_scale=1.0)
    res5 = mgf_rho(spec5, 5.0)
    assert res5.C == pytest.approx(1.0)
    assert res5.value == pytest.approx(0.3884389581171111, rel=1e-10)
    assert not res5.below_beta_star
    # independent cross-check: expectation over the two-branch step law
    q = math.exp(-5.0)
    lam = [q / (1 - q)] + [q ** k / (1 - q) for k in range(1, 400)]
    mass = sum(lam)
    direct = math.exp(-1) * (1 - mass) + lam[0] + sum(
        math.exp(k) * lam[k] for k in range(1, 400)
    )
    assert res5.value == pytest.approx(direct, rel=1e-10)


def test_mgf_rho_monotone_grid():
    spec = exponential_memory_preset(beta=6.0, g_scale=1.0)
    vals = [mgf_rho(spec, b).value for b in (3.0, 4.0, 5.0, 6.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_mgf_rho_regime_mismatch():
    spec = exponential_memory_preset(beta=2.0)
    with pytest.raises(RegimeMismatch):
        mgf_rho(spec, 3.0)  # aging decays slower than the requested rate
    with pytest.raises(RegimeMismatch):
        mgf_rho(two_neuron_preset(), 2.0)  # not exponential aging


def test_validate_model_trivial_and_regimes():
    free = independent_preset(2, 0.4)
    rep = validate_model(free, horizon=6)
    assert rep.C_gamma == 0.0 and rep.e_delta == 0.0
    assert rep.regime in ("theorem1", "both")
    assert rep.violations == []
    both = two_neuron_preset()
    rep2 = validate_model(both, horizon=6)
    assert rep2.regime == "both"
    assert rep2.m_sup is not None and rep2.m_sup < 1.0
    sub = two_neuron_unit()  # delta 0.9 > delta* ~ 0.84, g == 1 not summable
    rep3 = validate_model(sub, horizon=6)
    assert rep3.regime == "theorem1"
    low = ModelSpec(np.array([[0.0, 1.0], [1.0, 0.0]]),
                    PhiDescriptor("saturated-linear", delta=0.5, gamma=0.1),
                    AgingDescriptor("constant-one"))
    assert validate_model(low, horizon=6).regime == "neither"


def test_validate_model_is_pure():
    spec = two_neuron_preset()
    a = validate_model(spec, horizon=10)
    b = validate_model(spec, horizon=10)
    assert canonical_json(a.to_dict()) == canonical_json(b.to_dict())


def test_validate_model_delta_one_kills_e():
    spec = ModelSpec(np.array([[0.0, 1.0], [1.0, 0.0]]),
                     PhiDescriptor("saturated-linear", delta=1.0, gamma=0.2),
                     AgingDescriptor("constant-one"))
    rep = validate_model(spec, horizon=4)
    assert rep.e_delta == 0.0


def test_zd_window_interaction_series_bounded_by_majorant():
    from scipy.special import zeta

    radius, alpha = 4, 2.0
    spec = zd_window_preset(radius=radius, alpha=alpha)
    i = radius  # center neuron
    partial = []
    acc = 0.0
    for k in range(1, spec.k_sat(i) + 1):
        acc += len(spec.v(i, k)) * spec.residual_weight(i, k - 1)
        partial.append(acc)
    assert all(b >= a for a, b in zip(partial, partial[1:]))
    # closed-form majorant: ball size (2k+1) times the shell-count bound
    # 2 * l^(d-1) over the full lattice tail, sum over all ranges
    majorant = 2.0 * sum((2 * k + 1) * float(zeta(2 + alpha, k)) for k in range(1, 200))
    assert partial[-1] <= majorant


def test_memory_loss_constant():
    spec = two_neuron_preset()
    c = memory_loss_constant(spec)
    assert c == pytest.approx(2.0 / (1.0 - e_delta(spec, spec.delta)), rel=1e-12)
    low = ModelSpec(np.array([[0.0, 1.0], [1.0, 0.0]]),
                    PhiDescriptor("saturated-linear", delta=0.4, gamma=0.3),
                    AgingDescriptor("constant-one"))
    assert math.isinf(memory_loss_constant(low))
