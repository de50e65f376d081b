"""Convex decomposition of the spiking kernel into finite-range pieces.

For a site-time with no spontaneous spike, the one-step transition kernel
(which may look arbitrarily far into the past) is written as a mixture over
an interaction range k: with probability ``lam(k)`` the transition uses a
kernel ``p^[k]`` reading only neurons ``V_i(k)`` over a finite time window.
Range -1 is the environment-only kernel that reads nothing beyond the
spontaneous field.

Two variants are implemented:

- the random-environment decomposition, conditional on the realized
  spontaneous-spike field over the window back to the neuron's last
  spontaneous spike (used by the backward sampler with a rate floor);
- the space-time decomposition with deterministic per-neuron weights over
  blocks ``V_i(k) x [t-k-1, t-1]`` (used when the aging functions are
  summable and rates do not depend on the age).

Exact mixture weights are computed in the attractive case (nonnegative
weights; the shipped rate families are monotone and concave, so infima over
histories are attained at extremal configurations).  For signed weights the
per-history infima ``r^[k]`` are still exact, but the history-uniform
weights are replaced by dominating bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .models import ModelSpec

__all__ = [
    "NotAttractive",
    "ZeroMass",
    "ResidualMassTooLarge",
    "SiteTimeContext",
    "KalikowWeights",
    "r_bounds",
    "lambda_weights",
    "lambda_bar",
    "p_k_conditional",
    "reconstruct_transition",
    "direct_kernel",
    "lambda_spacetime",
    "spacetime_weights",
    "spacetime_r_bounds",
    "spacetime_p_k",
    "spacetime_direct_kernel",
]

_ARBITRARY_KERNEL = (0.5, 0.5)  # fixed choice where a zero-mass kernel is arbitrary


class NotAttractive(ValueError):
    """Exact weights were requested for a model with signed weights."""


class ZeroMass(ValueError):
    """A conditional kernel was requested at a range with zero weight."""


class ResidualMassTooLarge(ArithmeticError):
    """The range distribution cannot be truncated at the requested tolerance."""


# ---------------------------------------------------------------------------
# Site-time context (realized spontaneous environment)
# ---------------------------------------------------------------------------

@dataclass
class SiteTimeContext:
    """The spontaneous-spike environment of one site-time.

    ``xi_window[j, m]`` holds the spontaneous indicator of neuron j at time
    ``time - 1 - m`` (m = 0 .. age-1), i.e. lag m+1 before ``time``; the
    window reaches back exactly to the neuron's last spontaneous spike at
    ``time - age``.
    """

    neuron: int
    time: int
    xi_window: np.ndarray  # shape (N, age), lag-major as described above
    in_s_xi: bool = True

    def __post_init__(self):
        self.xi_window = np.asarray(self.xi_window, dtype=np.int8)
        i, age = self.neuron, self.age
        if age < 1:
            raise ValueError("the window must contain at least the last spontaneous spike")
        if self.xi_window[i, age - 1] != 1:
            raise ValueError("the neuron must have a spontaneous spike at the window start")
        if age > 1 and np.any(self.xi_window[i, : age - 1] != 0):
            raise ValueError("the neuron must have no spontaneous spike strictly inside the window")

    @property
    def age(self) -> int:
        """time - (last spontaneous spike time) of the target neuron."""
        return self.xi_window.shape[1]

    @property
    def r_time(self) -> int:
        """Time of the target neuron's last spontaneous spike."""
        return self.time - self.age

    def xi(self, j: int, s: int) -> int:
        """Spontaneous indicator of neuron j at absolute time s in the window."""
        lag = self.time - s
        if not (1 <= lag <= self.age):
            raise KeyError(f"time {s} outside the window [{self.r_time}, {self.time - 1}]")
        return int(self.xi_window[j, lag - 1])

    @classmethod
    def from_source(cls, src, spec: ModelSpec, i: int, t: int) -> "SiteTimeContext":
        from .perfect import last_spontaneous, xi_at

        r = last_spontaneous(src, spec.delta, i, t)
        age = t - r
        n = spec.neuron_count
        w = np.zeros((n, age), dtype=np.int8)
        for j in range(n):
            for lag in range(1, age + 1):
                w[j, lag - 1] = xi_at(src, spec.delta, j, t - lag)
        return cls(neuron=i, time=t, xi_window=w)


def _xi_weighted_prefix(ctx: SiteTimeContext, spec: ModelSpec) -> np.ndarray:
    """prefix[j, n] = sum over lags m = 1..n of g_j(m) * xi_{t-m}(j),
    for n = 0..age (prefix[:, 0] = 0)."""
    n_neurons, age = ctx.xi_window.shape
    out = np.zeros((n_neurons, age + 1))
    for j in range(n_neurons):
        gj = spec.g[j]
        acc = 0.0
        for m in range(1, age + 1):
            if ctx.xi_window[j, m - 1]:
                acc += gj(m)
            out[j, m] = acc
    return out


def _g_prefix(ctx: SiteTimeContext, spec: ModelSpec) -> np.ndarray:
    """prefix[j, n] = cumulative aging sum G_j(n) for n = 0..age."""
    n_neurons, age = ctx.xi_window.shape
    out = np.zeros((n_neurons, age + 1))
    for j in range(n_neurons):
        for m in range(1, age + 1):
            out[j, m] = spec.g[j].cumulative(m)
    return out


# ---------------------------------------------------------------------------
# Per-history infima r^[k]
# ---------------------------------------------------------------------------

def _own_last_spike(ctx: SiteTimeContext, x: Mapping, lowest: int) -> int:
    """Scan the target neuron's history in x from time-1 downward; stops at
    the first spike, so no coordinate below the result is ever read."""
    i, t = ctx.neuron, ctx.time
    for s in range(t - 1, lowest - 1, -1):
        if x[(i, s)]:
            return s
    raise ValueError("history contains no spike of the target neuron in the window")


def r_bounds(ctx: SiteTimeContext, spec: ModelSpec, k: int, x: Mapping | None = None,
             mode: str = "exact") -> tuple[float, float]:
    """Sharpest certain bounds at range k: the pair (least possible spike
    probability, least possible no-spike probability) over all histories
    agreeing with ``x`` on ``V_i(k)`` over the window (and compatible with
    the spontaneous field).

    For k = -1 no agreement is imposed and ``x`` is ignored.  The infima are
    attained coordinatewise (monotone rates), which is exact for any sign
    pattern; ``mode="exact"`` nevertheless refuses signed weights to keep the
    exact/dominated distinction explicit at call sites.
    """
    if mode == "exact" and not spec.attractive:
        raise NotAttractive("exact range bounds require nonnegative weights")
    i, t = ctx.neuron, ctx.time
    phi = spec.phi[i]
    wrow = spec.weights[i]
    xi_pref = _xi_weighted_prefix(ctx, spec)
    g_pref = _g_prefix(ctx, spec)

    if k < 0:
        best1 = best0 = math.inf
        for n in range(1, ctx.age + 1):
            lo = hi = 0.0
            for j in range(spec.neuron_count):
                w = wrow[j]
                if w == 0.0 or j == i:
                    continue
                if w > 0.0:
                    lo += w * xi_pref[j, n]
                    hi += w * g_pref[j, n]
                else:
                    lo += w * g_pref[j, n]
                    hi += w * xi_pref[j, n]
            best1 = min(best1, float(phi(lo, n)))
            best0 = min(best0, 1.0 - float(phi(hi, n)))
        return best1, best0

    if x is None:
        raise ValueError("a history window is required for k >= 0")
    v = spec.v(i, k)
    l_time = _own_last_spike(ctx, x, ctx.r_time)
    n = t - l_time
    pinned = 0.0
    for j in v:
        w = wrow[j]
        if w == 0.0 or j == i:
            continue
        acc = 0.0
        for s in range(l_time, t):
            if x[(j, s)]:
                acc += spec.g[j](t - s)
        pinned += w * acc
    lo = hi = pinned
    for j in range(spec.neuron_count):
        w = wrow[j]
        if w == 0.0 or j in v:
            continue
        if w > 0.0:
            lo += w * xi_pref[j, n]
            hi += w * g_pref[j, n]
        else:
            lo += w * g_pref[j, n]
            hi += w * xi_pref[j, n]
    return float(phi(lo, n)), 1.0 - float(phi(hi, n))


def direct_kernel(ctx: SiteTimeContext, spec: ModelSpec, x: Mapping) -> tuple[float, float]:
    """The true one-step kernel (p(spike | x), p(no spike | x)) evaluated on a
    fully specified history window."""
    i, t = ctx.neuron, ctx.time
    l_time = _own_last_spike(ctx, x, ctx.r_time)
    n = t - l_time
    total = 0.0
    for j in range(spec.neuron_count):
        w = spec.weights[i, j]
        if w == 0.0 or j == i:
            continue
        acc = 0.0
        for s in range(l_time, t):
            if x[(j, s)]:
                acc += spec.g[j](t - s)
        total += w * acc
    p1 = float(spec.phi[i](total, n))
    return p1, 1.0 - p1


# ---------------------------------------------------------------------------
# Mixture weights
# ---------------------------------------------------------------------------

@dataclass
class KalikowWeights:
    """Range distribution of one site-time.

    ``lam[k]`` for k = -1 .. k_max; ``alpha[k]`` are the cumulative masses
    (``alpha[-1] = lam[-1]``).  In exact mode the weights sum to one up to
    float error and ``residual_mass`` is the (zero) tail beyond ``k_max``;
    in dominated mode ``lam`` holds upper bounds whose sum may exceed one.
    """

    lam: dict
    alpha: dict
    r_minus1: tuple[float, float]
    exactness: str  # "exact-attractive" | "dominated"
    k_max: int
    residual_mass: float = 0.0

    def total(self) -> float:
        return math.fsum(self.lam.values())

    def to_dict(self) -> dict:
        return {
            "lambda": {str(k): self.lam[k] for k in sorted(self.lam)},
            "alpha": {str(k): self.alpha[k] for k in sorted(self.alpha)},
            "r_minus1": list(self.r_minus1),
            "exactness": self.exactness,
            "k_max": self.k_max,
            "residual_mass": self.residual_mass,
        }


def _clip_unit(v: float) -> float:
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


def lambda_weights(ctx: SiteTimeContext, spec: ModelSpec, k_max: int | None = None,
                   residual_tol: float = 1e-9) -> KalikowWeights:
    """Range distribution at this site-time.

    Attractive models get exact weights: the history-uniform infima are
    evaluated at the two extremal compatible histories (everything at the
    spontaneous field vs everything spiking) for each admissible age of the
    target's own chain.  The weights depend on the spontaneous field only
    through the window back to the last spontaneous spike.

    Signed models get dominating bounds (flagged, never renormalized).
    """
    i, t = ctx.neuron, ctx.time
    ksat = spec.k_sat(i)
    if k_max is None:
        k_max = ksat
    if not spec.attractive:
        r1, r0 = r_bounds(ctx, spec, -1, mode="dominated")
        lam_m1 = r1 + r0
        lam = {-1: lam_m1}
        g_age = max(spec.g[j].cumulative(ctx.age) for j in range(spec.neuron_count))
        lam[0] = min(spec.gamma * g_age * spec.summability_sup(), 1.0 - lam_m1)
        for k in range(1, k_max + 1):
            lam[k] = min(lambda_bar(ctx, spec, k), 1.0)
        residual = lambda_bar(ctx, spec, k_max + 1) if k_max < ksat else 0.0
        if residual > residual_tol:
            raise ResidualMassTooLarge(
                f"dominated residual {residual:g} beyond k_max={k_max} exceeds {residual_tol:g}"
            )
        alpha = {-1: lam_m1}
        acc = lam_m1
        for k in range(0, k_max + 1):
            acc += lam[k]
            alpha[k] = acc
        return KalikowWeights(lam, alpha, (r1, r0), "dominated", k_max, residual)

    if k_max < ksat:
        raise ResidualMassTooLarge(
            f"exact weights need k_max >= {ksat} (neighborhood saturation); got {k_max}"
        )
    k_max = ksat
    phi = spec.phi[i]
    wrow = spec.weights[i]
    xi_pref = _xi_weighted_prefix(ctx, spec)
    g_pref = _g_prefix(ctx, spec)
    ages = range(1, ctx.age + 1)

    # minimal-history input per age (everything at the spontaneous field)
    m_of_n = [math.fsum(wrow[j] * xi_pref[j, n] for j in range(spec.neuron_count) if j != i)
              for n in ages]

    def mass_k(k: int, n: int) -> float:
        """Maximal input at age n when coordinates in V_i(k) sit at the
        minimal history and everything else spikes throughout."""
        v = spec.v(i, k)
        return math.fsum(
            wrow[j] * (xi_pref[j, n] if j in v else g_pref[j, n])
            for j in range(spec.neuron_count) if j != i and wrow[j] != 0.0
        )

    r1 = min(float(phi(m_of_n[n - 1], n)) for n in ages)
    r0 = min(1.0 - float(phi(mass_k(-1, n), n)) for n in ages)
    alpha = {-1: r1 + r0}
    for k in range(0, k_max + 1):
        if k >= ksat:
            alpha[k] = 1.0
        else:
            alpha[k] = min(
                1.0 + float(phi(m_of_n[n - 1], n)) - float(phi(mass_k(k, n), n))
                for n in ages
            )
    lam = {-1: alpha[-1]}
    for k in range(0, k_max + 1):
        lam[k] = _clip_unit(alpha[k] - alpha[k - 1])
    return KalikowWeights(lam, alpha, (r1, r0), "exact-attractive", k_max, 0.0)


def lambda_bar(ctx: SiteTimeContext, spec: ModelSpec, k: int) -> float:
    """Dominating range weight: gamma * G(age) * (in-weight outside
    V_i(k-1)), where G is the sup over neurons of the cumulative aging sum."""
    if k < 1:
        raise ValueError("the dominating weight is defined for k >= 1")
    g_age = max(spec.g[j].cumulative(ctx.age) for j in range(spec.neuron_count))
    return spec.gamma * g_age * spec.residual_weight(ctx.neuron, k - 1)


# ---------------------------------------------------------------------------
# Conditional finite range kernels (interval partition construction)
# ---------------------------------------------------------------------------

def _overlap_mix(lo: float, hi: float, alpha_x: list[float],
                 pairs: list[tuple[float, float]]) -> tuple[float, float]:
    """Mix the history-dependent kernels over the interval ]lo, hi].

    ``alpha_x[l]`` are the cumulative history-dependent masses for ranges
    -1..k (alpha_x[0] belongs to range -1) and ``pairs[l]`` the corresponding
    increment kernels; block l covers ]alpha_x[l-1], alpha_x[l]] and
    contributes its overlap with ]lo, hi].
    """
    width = hi - lo
    acc1 = acc0 = 0.0
    covered = 0.0
    for l in range(1, len(alpha_x)):
        a, b = alpha_x[l - 1], alpha_x[l]
        ov = min(hi, b) - max(lo, a)
        if ov <= 0.0:
            continue
        block = b - a
        p1, p0 = pairs[l] if block > 0.0 else _ARBITRARY_KERNEL
        if block > 0.0:
            p1, p0 = p1 / block, p0 / block
        acc1 += ov * p1
        acc0 += ov * p0
        covered += ov
    if abs(covered - width) > 1e-9 * max(1.0, width):
        raise AssertionError(f"interval partition covers {covered}, expected {width}")
    return acc1 / width, acc0 / width


def p_k_conditional(ctx: SiteTimeContext, spec: ModelSpec, k: int, x: Mapping,
                    weights: KalikowWeights | None = None) -> tuple[float, float]:
    """The finite-range kernel used when the drawn range is k >= 0: reads
    ``x`` only on ``V_i(k)`` over the window, and mixes to the true kernel
    under the range distribution."""
    if weights is None:
        weights = lambda_weights(ctx, spec)
    if k < 0:
        lam_m1 = weights.lam[-1]
        if lam_m1 <= 0.0:
            raise ZeroMass("range -1 has zero mass")
        r1, r0 = weights.r_minus1
        return r1 / lam_m1, r0 / lam_m1
    if weights.exactness != "exact-attractive":
        raise NotAttractive("the interval-partition kernels need exact weights")
    lam_k = weights.lam.get(k, 0.0)
    if lam_k <= 0.0:
        raise ZeroMass(f"range {k} has zero mass at this site-time")
    pairs = [r_bounds(ctx, spec, l, x, mode="exact") for l in range(-1, k + 1)]
    alpha_x = [0.0, pairs[0][0] + pairs[0][1]]
    incr = [(0.0, 0.0), pairs[0]]
    for l in range(0, k + 1):
        cur = pairs[l + 1]
        prev = pairs[l]
        incr.append((cur[0] - prev[0], cur[1] - prev[1]))
        alpha_x.append(cur[0] + cur[1])
    lo, hi = weights.alpha[k - 1], weights.alpha[k]
    p1, p0 = _overlap_mix(lo, hi, alpha_x, incr)
    return _clip_unit(p1), _clip_unit(p0)


def reconstruct_transition(ctx: SiteTimeContext, spec: ModelSpec, x: Mapping) -> float:
    """Max over outcomes of |mixture - true kernel|; the mixture runs over
    all ranges with positive weight."""
    weights = lambda_weights(ctx, spec)
    acc1 = acc0 = 0.0
    for k in sorted(weights.lam):
        lk = weights.lam[k]
        if lk <= 0.0:
            continue
        p1, p0 = p_k_conditional(ctx, spec, k, x, weights)
        acc1 += lk * p1
        acc0 += lk * p0
    d1, d0 = direct_kernel(ctx, spec, x)
    return max(abs(acc1 - d1), abs(acc0 - d0))


# ---------------------------------------------------------------------------
# Space-time variant (age-independent rates, summable aging functions)
# ---------------------------------------------------------------------------

def _require_spacetime(spec: ModelSpec):
    from .analysis import RegimeMismatch

    if spec.age_dependent:
        raise RegimeMismatch("the space-time decomposition needs age-independent rates")
    if not all(g.summable for g in spec.g):
        raise RegimeMismatch("the space-time decomposition needs summable aging functions")


def _st_mass(spec: ModelSpec, i: int, k: int) -> float:
    """Largest input compatible with the all-quiet extremal history when
    V_i(k) over the k-block is pinned minimal: tails of pinned neighbors
    plus full mass of free ones."""
    wrow = spec.weights[i]
    v = spec.v(i, k)
    total = 0.0
    for j in range(spec.neuron_count):
        w = wrow[j]
        if w == 0.0 or j == i:
            continue
        gj = spec.g[j]
        if j in v and k >= 0:
            total += w * (gj.total() - gj.cumulative(k + 1))
        else:
            total += w * gj.total()
    return total


def lambda_spacetime(spec: ModelSpec, i: int, k: int, mode: str | None = None) -> float:
    """Space-time range weight of neuron i at range k (exact in the
    attractive case, else the dominating bound, flagged by mode)."""
    _require_spacetime(spec)
    if mode is None:
        mode = "exact" if spec.attractive else "dominated"
    if mode == "exact":
        if not spec.attractive:
            raise NotAttractive("exact space-time weights require nonnegative weights")
        if k == -1:
            phi = spec.phi[i]
            return float(phi(0.0)) + 1.0 - float(phi(_st_mass(spec, i, -1)))
        phi = spec.phi[i]
        a_k = 1.0 + float(phi(0.0)) - float(phi(_st_mass(spec, i, k)))
        if k == 0:
            a_prev = float(phi(0.0)) + 1.0 - float(phi(_st_mass(spec, i, -1)))
        else:
            a_prev = 1.0 + float(phi(0.0)) - float(phi(_st_mass(spec, i, k - 1)))
        return _clip_unit(a_k - a_prev)
    if k == -1:
        raise ValueError("the dominated mode bounds ranges k >= 0 only")
    from .analysis import lambda_spacetime_bound

    return lambda_spacetime_bound(spec, i, k)


def spacetime_weights(spec: ModelSpec, i: int, residual_tol: float = 1e-12,
                      hard_cap: int = 10_000) -> KalikowWeights:
    """Full space-time range distribution of neuron i, truncated where the
    residual mass drops below ``residual_tol`` (exact saturation for
    finite-support aging functions)."""
    _require_spacetime(spec)
    if not spec.attractive:
        raise NotAttractive("exact space-time weights require nonnegative weights")
    phi = spec.phi[i]
    phi0 = float(phi(0.0))
    lam_m1 = phi0 + 1.0 - float(phi(_st_mass(spec, i, -1)))
    alpha = {-1: lam_m1}
    lam = {-1: lam_m1}
    k = 0
    while True:
        a = 1.0 + phi0 - float(phi(_st_mass(spec, i, k)))
        lam[k] = _clip_unit(a - alpha[k - 1])
        alpha[k] = a
        residual = 1.0 - a
        if residual <= residual_tol:
            return KalikowWeights(lam, alpha, (phi0, 1.0 - float(phi(_st_mass(spec, i, -1)))),
                                  "exact-attractive", k, max(residual, 0.0))
        if k > hard_cap:
            raise ResidualMassTooLarge(
                f"residual mass {residual:g} after {hard_cap} ranges exceeds {residual_tol:g}"
            )
        k += 1


def spacetime_r_bounds(spec: ModelSpec, i: int, t: int, k: int,
                       x: Mapping | None = None) -> tuple[float, float]:
    """Space-time analog of the certain bounds at range k for a transition at
    time t: agreement is imposed on ``V_i(k) x [t-k-1, t-1]`` (just the
    neuron's previous step for k = 0)."""
    _require_spacetime(spec)
    if not spec.attractive:
        raise NotAttractive("space-time bounds are implemented for attractive models")
    phi = spec.phi[i]
    wrow = spec.weights[i]
    if k < 0:
        return float(phi(0.0)), 1.0 - float(phi(_st_mass(spec, i, -1)))
    if x is None:
        raise ValueError("a history block is required for k >= 0")
    v = spec.v(i, k)
    low = t - 1 if k == 0 else t - k - 1
    l_pin = None
    for s in range(t - 1, low - 1, -1):
        if x[(i, s)]:
            l_pin = s
            break
    if l_pin is not None:
        pinned = 0.0
        for j in v:
            w = wrow[j]
            if w == 0.0 or j == i:
                continue
            acc = 0.0
            for s in range(l_pin, t):
                if x[(j, s)]:
                    acc += spec.g[j](t - s)
            pinned += w * acc
        free_hi = math.fsum(
            wrow[j] * spec.g[j].cumulative(t - l_pin)
            for j in range(spec.neuron_count)
            if j != i and j not in v and wrow[j] != 0.0
        )
        return float(phi(pinned)), 1.0 - float(phi(pinned + free_hi))
    # no pinned spike of the target: the window may reach arbitrarily far back
    pinned = 0.0
    for j in v:
        w = wrow[j]
        if w == 0.0 or j == i:
            continue
        acc = 0.0
        for s in range(low, t):
            if x[(j, s)]:
                acc += spec.g[j](t - s)
        pinned += w * acc
    free_hi = 0.0
    for j in range(spec.neuron_count):
        w = wrow[j]
        if w == 0.0 or j == i:
            continue
        gj = spec.g[j]
        if j in v:
            free_hi += w * (gj.total() - gj.cumulative(k + 1))
        else:
            free_hi += w * gj.total()
    return float(phi(pinned)), 1.0 - float(phi(pinned + free_hi))


def spacetime_p_k(spec: ModelSpec, i: int, t: int, k: int, x: Mapping,
                  weights: KalikowWeights | None = None) -> tuple[float, float]:
    """Finite-range kernel of the space-time decomposition at range k >= 0."""
    if weights is None:
        weights = spacetime_weights(spec, i)
    if k < 0:
        lam_m1 = weights.lam[-1]
        if lam_m1 <= 0.0:
            raise ZeroMass("range -1 has zero mass")
        r1, r0 = weights.r_minus1
        return r1 / lam_m1, r0 / lam_m1
    if weights.lam.get(k, 0.0) <= 0.0:
        raise ZeroMass(f"range {k} has zero mass for neuron {i}")
    pairs = [spacetime_r_bounds(spec, i, t, l, x) for l in range(-1, k + 1)]
    alpha_x = [0.0, pairs[0][0] + pairs[0][1]]
    incr = [(0.0, 0.0), pairs[0]]
    for l in range(0, k + 1):
        cur, prev = pairs[l + 1], pairs[l]
        incr.append((cur[0] - prev[0], cur[1] - prev[1]))
        alpha_x.append(cur[0] + cur[1])
    lo, hi = weights.alpha[k - 1], weights.alpha[k]
    p1, p0 = _overlap_mix(lo, hi, alpha_x, incr)
    return _clip_unit(p1), _clip_unit(p0)


def spacetime_direct_kernel(spec: ModelSpec, i: int, t: int, x: Mapping,
                            history_start: int) -> tuple[float, float]:
    """True kernel for a history fully specified on [history_start, t-1] and
    all-quiet before (used as the oracle in reconstruction tests)."""
    _require_spacetime(spec)
    l_time = None
    for s in range(t - 1, history_start - 1, -1):
        if x[(i, s)]:
            l_time = s
            break
    total = 0.0
    for j in range(spec.neuron_count):
        w = spec.weights[i, j]
        if w == 0.0 or j == i:
            continue
        acc = 0.0
        start = history_start if l_time is None else l_time
        for s in range(start, t):
            if x[(j, s)]:
                acc += spec.g[j](t - s)
        total += w * acc
    p1 = float(spec.phi[i](total))
    return p1, 1.0 - p1
