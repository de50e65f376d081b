"""Analytic constants and model validation.

Computes the quantities that control the backward sampler: the cumulative
aging envelope G, the interaction constant C_gamma, the clan reproduction
bound e(delta) with its critical floor delta_star, the space-time
reproduction mean, and the moment generating function value governing
geometric loss of memory for exponentially fading models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import AgingDescriptor, MalformedSpec, ModelSpec

__all__ = [
    "NonFiniteConstant",
    "SeriesDiverges",
    "RegimeMismatch",
    "ValidationReport",
    "DeltaStarResult",
    "MgfResult",
    "G_cumulative",
    "C_gamma",
    "E_G_delta",
    "e_delta",
    "delta_star",
    "lambda_spacetime_bound",
    "reproduction_mean",
    "mgf_rho",
    "validate_model",
    "memory_loss_constant",
]

_TOL = 1e-10
_OVERFLOW_GUARD = 1e15


class NonFiniteConstant(ArithmeticError):
    """A required constant is not finite for this model."""


class SeriesDiverges(NonFiniteConstant):
    """Partial sums exceeded the overflow guard before reaching tolerance."""


class RegimeMismatch(ValueError):
    """Operation requested outside the regime where it is defined."""


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

def G_cumulative(spec: ModelSpec, n: int) -> float:
    """sup over neurons of the cumulative aging sum g(1) + ... + g(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(g.cumulative(n) for g in spec.g)


def C_gamma(spec: ModelSpec) -> float:
    """Interaction constant 2 * gamma * sup_j sum_k |V_j(k)| * (residual
    weight outside V_j(k-1)); a finite sum since neighborhoods saturate."""
    best = 0.0
    for j in range(spec.neuron_count):
        total = math.fsum(
            len(spec.v(j, k)) * spec.residual_weight(j, k - 1)
            for k in range(1, spec.k_sat(j) + 1)
        )
        best = max(best, total)
    return 2.0 * spec.gamma * best


def E_G_delta(spec: ModelSpec, delta: float, tol: float = _TOL) -> tuple[float, float]:
    """The weighted aging series G(1) + sum_{n>=2} (1-delta)^(n-2) n^2 G(n).

    Returns (value, truncation error bound).  The tail is controlled by the
    geometric factor: G(n) <= gmax * n for every shipped family, so the
    remainder after n terms is bounded by a closed-form geometric-cubic tail.
    Raises SeriesDiverges when partial sums blow past the overflow guard.
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    if delta == 1.0:
        return G_cumulative(spec, 1), 0.0
    x = 1.0 - delta
    gmax = max(g.sup_value for g in spec.g)
    total = G_cumulative(spec, 1)
    n = 2
    while True:
        term = x ** (n - 2) * n * n * G_cumulative(spec, n)
        total += term
        if total > _OVERFLOW_GUARD:
            raise SeriesDiverges(
                f"aging series exceeds {_OVERFLOW_GUARD:g} at n={n} (delta={delta})"
            )
        # remainder bound: sum_{m>n} x^(m-2) m^2 G(m) <= gmax * sum_{m>n} x^(m-2) m^3
        # and m^3 <= (n+1)^3 * exp(3 (m-n-1) / (n+1)) for m > n
        growth = x * math.exp(3.0 / (n + 1))
        if growth < 1.0:
            tail = gmax * x ** (n - 1) * (n + 1) ** 3 / (1.0 - growth)
            if tail <= tol * max(1.0, total):
                return total, tail
        n += 1


def e_delta(spec: ModelSpec, delta: float) -> float:
    """Clan reproduction bound C_gamma * (1 - delta) * E(G, delta).

    Zero whenever the interaction constant vanishes or delta == 1, without
    evaluating the series (which may diverge for small delta).
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    cg = C_gamma(spec)
    if cg == 0.0 or delta == 1.0:
        return 0.0
    value, _ = E_G_delta(spec, delta)
    return cg * (1.0 - delta) * value


@dataclass(frozen=True)
class DeltaStarResult:
    value: float
    flag: str  # "crossing" | "all-subcritical" | "no-crossing-below-one"

    def __float__(self) -> float:
        return self.value


def delta_star(spec: ModelSpec, tol: float = 1e-8) -> DeltaStarResult:
    """Critical floor: the smallest delta with e(delta) <= 1, located by
    bisection on [1e-6, 1 - 1e-6] using that e is nonincreasing in delta.

    Endpoint cases are flagged: "all-subcritical" when e <= 1 already at the
    lower clamp (value 0.0), "no-crossing-below-one" when e > 1 at the upper
    clamp (value 1 - 1e-6).
    """
    lo, hi = 1e-6, 1.0 - 1e-6

    def e_at(d: float) -> float:
        try:
            return e_delta(spec, d)
        except SeriesDiverges:
            return math.inf

    if e_at(hi) > 1.0:
        return DeltaStarResult(hi, "no-crossing-below-one")
    if e_at(lo) <= 1.0:
        return DeltaStarResult(0.0, "all-subcritical")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if e_at(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return DeltaStarResult(hi, "crossing")


# ---------------------------------------------------------------------------
# Space-time reproduction mean (summable-memory regime)
# ---------------------------------------------------------------------------

def lambda_spacetime_bound(spec: ModelSpec, i: int, k: int) -> float:
    """Upper bound on the space-time range weight of neuron i at range k:
    gamma * (residual in-weight outside V_i(k-1) times the full aging mass,
    plus in-weight inside V_i(k-1) times the aging tail beyond k)."""
    if k < 0:
        raise ValueError("bounds are defined for k >= 0")
    gam = spec.gamma
    if k == 0:
        return gam * math.fsum(
            abs(spec.weights[i, j]) * spec.g[j].total()
            for j in range(spec.neuron_count) if spec.weights[i, j] != 0.0
        )
    v_prev = spec.v(i, k - 1)
    out_part = math.fsum(
        abs(spec.weights[i, j]) * spec.g[j].total()
        for j in range(spec.neuron_count)
        if j not in v_prev and spec.weights[i, j] != 0.0
    )
    in_part = math.fsum(
        abs(spec.weights[i, j]) * spec.g[j].tail(k)
        for j in v_prev if spec.weights[i, j] != 0.0
    )
    return gam * (out_part + in_part)


def _require_spacetime_regime(spec: ModelSpec):
    if spec.age_dependent:
        raise RegimeMismatch("rate functions must not depend on the age")
    if not all(g.summable for g in spec.g):
        raise RegimeMismatch("aging functions must be summable")


def reproduction_mean(spec: ModelSpec, i: int, exact: bool | None = None) -> tuple[float, str]:
    """Mean offspring count of the space-time ancestor process of neuron i:
    lambda_i(0) + sum_{k>=1} (k+1) |V_i(k)| lambda_i(k).

    With exact range weights (attractive models) when available, otherwise
    with the dominating bounds; returns (value, "exact" | "bound").
    """
    _require_spacetime_regime(spec)
    if exact is None:
        exact = spec.attractive
    if exact and not spec.attractive:
        raise RegimeMismatch("exact reproduction mean needs nonnegative weights")
    if exact:
        from .kalikow import spacetime_weights

        w = spacetime_weights(spec, i)
        lam = dict(w.lam)
        mode = "exact"
    else:
        lam = None
        mode = "bound"

    ksat = spec.k_sat(i)
    vsat = len(spec.v(i, ksat))

    def lam_at(k: int) -> float:
        if lam is not None and k in lam:
            return lam[k]
        return lambda_spacetime_bound(spec, i, k)

    total = lam_at(0)
    k = 1
    while True:
        size = len(spec.v(i, k))
        term = (k + 1) * size * lam_at(k)
        total += term
        if total > _OVERFLOW_GUARD:
            raise NonFiniteConstant("space-time reproduction series diverges")
        if k >= ksat:
            # beyond saturation the bound decays with the aging tail alone
            bound_next = (k + 2) * vsat * lambda_spacetime_bound(spec, i, k + 1)
            if bound_next < 1e-14 * max(1.0, total) or bound_next == 0.0:
                break
            if k > ksat + 10_000:
                raise NonFiniteConstant("space-time reproduction series converges too slowly")
        k += 1
    return total, mode


# ---------------------------------------------------------------------------
# Loss-of-memory MGF (exponentially fading regime)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MgfResult:
    value: float
    C: float
    step_mass: float  # total mass of the nonnegative steps of the walk
    below_beta_star: bool

    def __float__(self) -> float:
        return self.value


def _exp_envelope_constant(spec: ModelSpec, beta: float) -> float:
    """Smallest C with g_j(n) <= C e^{-beta n} and residual in-weight outside
    V_i(n) <= C e^{-beta n} for all n >= 1."""
    c = 0.0
    for g in spec.g:
        if g.family != "exponential":
            raise RegimeMismatch("geometric loss of memory needs exponential aging functions")
        if g.beta < beta:
            raise RegimeMismatch(
                f"aging decay rate {g.beta} is slower than the requested rate {beta}"
            )
        # sup_n C_g e^{(beta - beta_g) n} attained at n = 1
        c = max(c, g.C * math.exp(beta - g.beta))
    for i in range(spec.neuron_count):
        for n in range(1, spec.k_sat(i) + 1):
            res = spec.residual_weight(i, n)
            if res > 0.0:
                c = max(c, res * math.exp(beta * n))
    return c


def mgf_rho(spec: ModelSpec, beta: float) -> MgfResult:
    """Value at 1 of the moment generating function of the dominating random
    walk step: the geometric decay rate of the loss-of-memory profile when it
    is < 1.

    The walk steps down by 1 with the leftover mass and up by k with mass
    ``C e^{-beta k} / (1 - e^{-beta})`` (k >= 1; the k = 0 mass equals the
    k = 1 mass).  Results with value >= 1 or step mass >= 1 are flagged as
    below the critical decay rate.
    """
    _require_spacetime_regime(spec)
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = _exp_envelope_constant(spec, beta)
    q = math.exp(-beta)
    lam0 = c * q / (1.0 - q)
    mass_up = lam0 + c / (1.0 - q) * q / (1.0 - q)  # lam0 + sum_{k>=1} C e^{-beta k}/(1-q)
    if beta <= 1.0 or mass_up >= 1.0:
        return MgfResult(math.inf, c, mass_up, True)
    e1b = math.exp(1.0 - beta)
    rho = (
        math.exp(-1.0) * (1.0 - mass_up)
        + lam0
        + c / (1.0 - q) * e1b / (1.0 - e1b)
    )
    return MgfResult(rho, c, mass_up, rho >= 1.0)


def memory_loss_constant(spec: ModelSpec, delta: float | None = None) -> float:
    """Constant of the 1/(s-1) memory-decay bound: 2 / (1 - e(delta))."""
    d = spec.delta if delta is None else delta
    e = e_delta(spec, d)
    if e >= 1.0:
        return math.inf
    return 2.0 / (1.0 - e)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    summability_sup: float
    G_table: list[float]
    C_gamma: float
    E_G_delta: float
    E_G_truncation: float
    e_delta: float
    delta: float
    delta_star: float
    delta_star_flag: str
    m_sup: float | None
    regime: str  # "theorem1" | "theorem2" | "both" | "neither"
    violations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "summability_sup": self.summability_sup,
            "G_table": self.G_table,
            "C_gamma": self.C_gamma,
            "E_G_delta": self.E_G_delta,
            "E_G_truncation": self.E_G_truncation,
            "e_delta": self.e_delta,
            "delta": self.delta,
            "delta_star": self.delta_star,
            "delta_star_flag": self.delta_star_flag,
            "m_sup": self.m_sup,
            "regime": self.regime,
            "violations": self.violations,
        }


def _check_phi_floor_and_lipschitz(spec: ModelSpec, violations: list[str]):
    """Sampled checks that every rate function stays in [delta, 1] and obeys
    the declared Lipschitz constant."""
    s_grid = np.concatenate([np.linspace(0.0, 8.0, 33), [20.0, 100.0]])
    ages = [1, 2, 5, 20]
    for idx, phi in enumerate(spec.phi):
        for n in ages:
            vals = phi(s_grid, n)
            if np.any(vals < spec.delta - 1e-12) or np.any(vals > 1.0 + 1e-12):
                violations.append(f"phi[{idx}] leaves [delta, 1] at age {n}")
                break
            diffs = np.abs(np.diff(vals))
            steps = np.abs(np.diff(s_grid))
            if np.any(diffs > spec.gamma * steps + 1e-9):
                violations.append(f"phi[{idx}] violates the Lipschitz constant at age {n}")
                break


def validate_model(spec: ModelSpec, horizon: int) -> ValidationReport:
    """Compute the model's analytic constants and classify its regime.

    Pure: equal inputs give bit-identical reports.  Raises MalformedSpec for
    structural violations (the ModelSpec constructor catches most of them).
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    violations: list[str] = []
    _check_phi_floor_and_lipschitz(spec, violations)

    g_table = [G_cumulative(spec, n) for n in range(1, horizon + 1)]
    cg = C_gamma(spec)
    d = spec.delta

    try:
        eg, eg_err = E_G_delta(spec, d)
        ed = cg * (1.0 - d) * eg if cg > 0.0 else 0.0
    except SeriesDiverges:
        eg, eg_err = math.inf, math.inf
        ed = math.inf if cg > 0.0 else 0.0
        violations.append("aging series diverges at the declared delta")

    ds = delta_star(spec)

    m_sup: float | None = None
    try:
        _require_spacetime_regime(spec)
        m_sup = max(reproduction_mean(spec, i)[0] for i in range(spec.neuron_count))
    except RegimeMismatch:
        m_sup = None
    except NonFiniteConstant:
        m_sup = math.inf

    theorem1 = (
        not violations
        and math.isfinite(ed)
        and ed <= 1.0
        and d >= ds.value
    )
    theorem2 = m_sup is not None and m_sup < 1.0
    regime = {
        (True, True): "both",
        (True, False): "theorem1",
        (False, True): "theorem2",
        (False, False): "neither",
    }[(theorem1, theorem2)]

    return ValidationReport(
        summability_sup=spec.summability_sup(),
        G_table=g_table,
        C_gamma=cg,
        E_G_delta=eg,
        E_G_truncation=eg_err,
        e_delta=ed,
        delta=d,
        delta_star=ds.value,
        delta_star_flag=ds.flag,
        m_sup=m_sup,
        regime=regime,
        violations=violations,
    )
