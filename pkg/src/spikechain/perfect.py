"""Backward perfect sampler: draws exact stationary samples on finite windows.

The construction works conditionally on the spontaneous-spike field: sites
with a spontaneous spike are spikes outright; for the rest, a single uniform
per site jointly draws an interaction range and, at range -1, the value
itself, from the field-conditioned version of the range distribution.
Ranges k >= 0 defer the value to a finite-range kernel that needs the
ancestor values first, so resolution recurses backward in time; the clan of
ancestors is the set of site-times that recursion may touch, built with the
worst-case window back to the last spontaneous spike.

All randomness is keyed by (purpose, neuron, time), so any traversal order,
overlapping windows, and repeated queries agree bit for bit.

Two engines:

- exact (attractive models): ranges from the exact mixture weights, values
  from the interval-partition kernels;
- dominated (signed weights): a single uniform is tested against the nested
  certain-bound intervals, widening the read window until the value is
  decided; ranges are over-dispersed but the sampled law is still exact.

A space-time engine covers the summable-memory regime, where no spontaneous
field is needed and range weights are deterministic per neuron.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import RegimeMismatch, e_delta, reproduction_mean
from .fields import SpikeField
from .kalikow import (
    KalikowWeights,
    SiteTimeContext,
    lambda_weights,
    p_k_conditional,
    r_bounds,
    spacetime_p_k,
    spacetime_weights,
)
from .models import ModelSpec
from .rng import RandomCoordinateSource

__all__ = [
    "BudgetExceeded",
    "ScanCapExceeded",
    "IncompleteClan",
    "Clan",
    "xi_at",
    "last_spontaneous",
    "clan_of_ancestors",
    "forward_coloring",
    "perfect_sample",
    "spacetime_sample",
    "spacetime_clan",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 1_000_000
_SCAN_CAP = 10_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, coordinate, budget):
        super().__init__(f"work budget {budget} exceeded while resolving {coordinate}")
        self.coordinate = coordinate
        self.budget = budget


class ScanCapExceeded(RuntimeError):
    """Backward scan for a spontaneous spike ran past the defensive cap."""


class IncompleteClan(RuntimeError):
    """Coloring needed a site-time outside the clan closure."""


# ---------------------------------------------------------------------------
# Spontaneous field
# ---------------------------------------------------------------------------

def xi_at(src: RandomCoordinateSource, delta: float, i: int, t: int) -> int:
    """Spontaneous-spike indicator: Bernoulli(delta), deterministic per
    (seed, neuron, time)."""
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    return 1 if src.uniform("xi", i, t) < delta else 0


def last_spontaneous(src: RandomCoordinateSource, delta: float, i: int, t: int) -> int:
    """Largest s < t with a spontaneous spike of neuron i at s."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    for back in range(1, _SCAN_CAP + 1):
        if xi_at(src, delta, i, t - back):
            return t - back
    raise ScanCapExceeded(f"no spontaneous spike of neuron {i} within {_SCAN_CAP} steps before {t}")


# ---------------------------------------------------------------------------
# Clan of ancestors
# ---------------------------------------------------------------------------

@dataclass
class Clan:
    """Generations of ancestor site-times of one target coordinate.

    ``generations`` ends with the first empty set; ``n_stop`` is its 1-based
    index.  ``t_stop`` is the earliest time coordinate reached by any
    ancestor (the target time when the clan is empty).  ``chosen_ranges``
    records the sampled range of every site-time whose range was drawn.
    """

    target: tuple
    generations: list
    chosen_ranges: dict
    n_stop: int
    t_stop: int

    @property
    def members(self) -> set:
        out = set()
        for gen in self.generations:
            out |= gen
        return out

    @property
    def size(self) -> int:
        return sum(len(g) for g in self.generations)


class _ExactResolver:
    """Shared machinery: field-conditioned range decisions, contexts, mixture
    weights and value resolution, all memoized per coordinate."""

    def __init__(self, src: RandomCoordinateSource, spec: ModelSpec, budget: int):
        self.src = src
        self.spec = spec
        self.budget = budget
        self.delta = spec.delta
        self.decisions: dict = {}
        self.values: dict = {}
        self.contexts: dict = {}
        self.weights: dict = {}
        self.r_cache: dict = {}
        self.work = 0

    def reset_work(self):
        self.work = 0

    def _charge(self, coordinate):
        self.work += 1
        if self.work > self.budget:
            raise BudgetExceeded(coordinate, self.budget)

    def context(self, j: int, s: int) -> SiteTimeContext:
        ctx = self.contexts.get((j, s))
        if ctx is None:
            ctx = SiteTimeContext.from_source(self.src, self.spec, j, s)
            self.contexts[(j, s)] = ctx
        return ctx

    def kweights(self, j: int, s: int) -> KalikowWeights:
        w = self.weights.get((j, s))
        if w is None:
            w = lambda_weights(self.context(j, s), self.spec)
            self.weights[(j, s)] = w
        return w

    def decision(self, j: int, s: int):
        """Joint draw of (range, value-at-range-(-1)) for a site-time with no
        spontaneous spike, under the law conditioned on that absence."""
        d = self.decisions.get((j, s))
        if d is not None:
            return d
        self._charge((j, s))
        w = self.kweights(j, s)
        r1, r0 = w.r_minus1
        one_minus = 1.0 - self.delta
        u = self.src.uniform("range", j, s)
        a_spike = (r1 - self.delta) / one_minus
        a_still = a_spike + r0 / one_minus
        if u < a_spike:
            d = (-1, 1)
        elif u < a_still:
            d = (-1, 0)
        else:
            c = a_still
            d = None
            last_positive = None
            for k in range(0, w.k_max + 1):
                lk = w.lam.get(k, 0.0)
                if lk <= 0.0:
                    continue
                last_positive = k
                c += lk / one_minus
                if u < c:
                    d = (k, None)
                    break
            if d is None:
                if last_positive is None:
                    d = (-1, 0)  # all mass at range -1 up to rounding
                else:
                    d = (last_positive, None)
        self.decisions[(j, s)] = d
        return d

    def expand(self, j: int, s: int) -> set:
        """Generation-1 ancestors of one site-time: for every own-chain step
        back to the last spontaneous spike, the drawn neighborhood's
        spontaneous-free block."""
        r_time = self.context(j, s).r_time
        out = set()
        for s2 in range(r_time + 1, s + 1):
            k, _ = self.decision(j, s2)
            if k < 1:
                continue
            for j2 in self.spec.v(j, k):
                if j2 == j:
                    continue
                for u in range(r_time, s2):
                    if not xi_at(self.src, self.delta, j2, u):
                        out.add((j2, u))
        return out

    def value(self, j: int, s: int, allowed: set | None = None) -> int:
        v = self.values.get((j, s))
        if v is not None:
            return v
        if xi_at(self.src, self.delta, j, s):
            self.values[(j, s)] = 1
            return 1
        if allowed is not None and (j, s) not in allowed:
            raise IncompleteClan(f"site-time {(j, s)} is outside the clan closure")
        k, v = self.decision(j, s)
        if k == -1:
            self.values[(j, s)] = v
            return v
        ctx = self.context(j, s)
        r_time = ctx.r_time
        if allowed is not None:
            for u in range(r_time + 1, s):
                allowed.add((j, u))
        # own chain down to the last true spike
        l_time = r_time
        for u in range(s - 1, r_time - 1, -1):
            if self.value(j, u, allowed):
                l_time = u
                break
        x = {}
        for j2 in self.spec.v(j, k):
            for u in range(l_time, s):
                x[(j2, u)] = self.value(j2, u, allowed)
        p1, _ = p_k_conditional(ctx, self.spec, k, x, self.kweights(j, s))
        v = 1 if self.src.uniform("value", j, s) < p1 else 0
        self.values[(j, s)] = v
        return v


class _DominatedResolver:
    """Signed-weight engine: one uniform per site, rescaled above the floor,
    tested against nested certain bounds with an adaptively widened window."""

    def __init__(self, src: RandomCoordinateSource, spec: ModelSpec, budget: int):
        self.src = src
        self.spec = spec
        self.budget = budget
        self.delta = spec.delta
        self.values: dict = {}
        self.contexts: dict = {}
        self.work = 0

    def reset_work(self):
        self.work = 0

    def context(self, j: int, s: int) -> SiteTimeContext:
        ctx = self.contexts.get((j, s))
        if ctx is None:
            ctx = SiteTimeContext.from_source(self.src, self.spec, j, s)
            self.contexts[(j, s)] = ctx
        return ctx

    def value(self, j: int, s: int) -> int:
        v = self.values.get((j, s))
        if v is not None:
            return v
        if xi_at(self.src, self.delta, j, s):
            self.values[(j, s)] = 1
            return 1
        self.work += 1
        if self.work > self.budget:
            raise BudgetExceeded((j, s), self.budget)
        u = self.delta + (1.0 - self.delta) * self.src.uniform("range", j, s)
        ctx = self.context(j, s)
        r1, r0 = r_bounds(ctx, self.spec, -1, mode="dominated")
        if u <= r1:
            v = 1
        elif u > 1.0 - r0:
            v = 0
        else:
            l_time = ctx.r_time
            for t2 in range(s - 1, ctx.r_time - 1, -1):
                if self.value(j, t2):
                    l_time = t2
                    break
            x = {(j, t2): self.values[(j, t2)] for t2 in range(l_time, s)}
            v = None
            for k in range(0, self.spec.k_sat(j) + 1):
                for j2 in self.spec.v(j, k):
                    if j2 == j:
                        continue
                    for t2 in range(l_time, s):
                        if (j2, t2) not in x:
                            x[(j2, t2)] = self.value(j2, t2)
                r1, r0 = r_bounds(ctx, self.spec, k, x, mode="dominated")
                if u <= r1:
                    v = 1
                    break
                if u > 1.0 - r0:
                    v = 0
                    break
            if v is None:
                v = 1 if u <= r1 else 0  # saturated window: bounds meet the kernel
        self.values[(j, s)] = v
        return v


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def clan_of_ancestors(src: RandomCoordinateSource, spec: ModelSpec, i: int, t: int,
                      budget: int = DEFAULT_BUDGET) -> Clan:
    """Backward generations of site-times whose values the target may need.

    Pairwise disjoint generations, ending with the first empty one; every
    member lacks a spontaneous spike and sits strictly before the target."""
    if not spec.attractive:
        return _dominated_clan(src, spec, i, t, budget)
    res = _ExactResolver(src, spec, budget)
    return _build_clan(res.expand, res, src, spec, i, t, budget)


def _build_clan(expand, res, src, spec, i, t, budget) -> Clan:
    if xi_at(src, spec.delta, i, t):
        return Clan((i, t), [set()], {}, 1, t)
    generations = []
    prior: set = set()
    current = expand(i, t)
    total = 0
    while True:
        generations.append(current)
        total += len(current)
        if total > budget:
            raise BudgetExceeded((i, t), budget)
        if not current:
            break
        nxt = set()
        for (j, s) in current:
            nxt |= expand(j, s)
        prior |= current
        current = nxt - prior
    ranges = dict(getattr(res, "decisions", {})) if res is not None else {}
    chosen = {coord: d[0] for coord, d in ranges.items()} if ranges else {}
    earliest = min((u for gen in generations for (_, u) in gen), default=t)
    return Clan((i, t), generations, chosen, len(generations), earliest)


def _dominated_clan(src, spec, i, t, budget) -> Clan:
    """Conservative clan for signed weights: a site either terminates at
    range -1 for every history (its uniform clears the certain bounds) or may
    need its whole saturated neighborhood over the window."""
    delta = spec.delta
    decisions = {}

    def decide(j, s):
        d = decisions.get((j, s))
        if d is None:
            ctx = SiteTimeContext.from_source(src, spec, j, s)
            r1, r0 = r_bounds(ctx, spec, -1, mode="dominated")
            u = delta + (1.0 - delta) * src.uniform("range", j, s)
            d = -1 if (u <= r1 or u > 1.0 - r0) else spec.k_sat(j)
            decisions[(j, s)] = d
        return d

    def expand(j, s):
        r_time = last_spontaneous(src, delta, j, s)
        out = set()
        for s2 in range(r_time + 1, s + 1):
            k = decide(j, s2)
            if k < 1:
                continue
            for j2 in spec.v(j, k):
                if j2 == j:
                    continue
                for u in range(r_time, s2):
                    if not xi_at(src, delta, j2, u):
                        out.add((j2, u))
        return out

    clan = _build_clan(expand, None, src, spec, i, t, budget)
    clan.chosen_ranges.update(decisions)
    return clan


def forward_coloring(clan: Clan, src: RandomCoordinateSource, spec: ModelSpec,
                     budget: int = DEFAULT_BUDGET) -> int:
    """Resolve the clan from the deepest generation up and return the value
    at the clan target.  Deterministic given (clan coordinates, source)."""
    i, t = clan.target
    if xi_at(src, spec.delta, i, t):
        return 1
    allowed = set(clan.members)
    allowed.add((i, t))
    if spec.attractive:
        res = _ExactResolver(src, spec, budget)
        return res.value(i, t, allowed)
    res = _DominatedResolver(src, spec, budget)
    return res.value(i, t)


def _check_theorem1(spec: ModelSpec):
    ed = e_delta(spec, spec.delta)
    if ed > 1.0:
        raise RegimeMismatch(
            f"clan reproduction bound e(delta) = {ed:.4g} > 1 at delta = {spec.delta}; "
            "the backward construction is not certified to terminate"
        )


def perfect_sample(src: RandomCoordinateSource, spec: ModelSpec, neurons, window,
                   budget: int = DEFAULT_BUDGET, check_regime: bool = True) -> SpikeField:
    """Exact stationary sample on ``neurons x [window[0], window[1])``.

    All coordinate queries go through the source, so overlapping windows
    sampled under the same seed agree bit for bit on the intersection.
    """
    t0, t1 = window
    if t1 <= t0:
        raise ValueError("empty window")
    if check_regime:
        _check_theorem1(spec)
    neurons = tuple(int(j) for j in neurons)
    resolver = _ExactResolver(src, spec, budget) if spec.attractive \
        else _DominatedResolver(src, spec, budget)
    data = np.zeros((len(neurons), t1 - t0), dtype=np.int8)
    for a, j in enumerate(neurons):
        for b, t in enumerate(range(t0, t1)):
            resolver.reset_work()
            data[a, b] = resolver.value(j, t)
    return SpikeField(neurons, t0, t1, data)


# ---------------------------------------------------------------------------
# Space-time engine
# ---------------------------------------------------------------------------

class _SpacetimeResolver:
    def __init__(self, src: RandomCoordinateSource, spec: ModelSpec, budget: int):
        self.src = src
        self.spec = spec
        self.budget = budget
        self.weights = [spacetime_weights(spec, i) for i in range(spec.neuron_count)]
        self.values: dict = {}
        self.decisions: dict = {}
        self.work = 0

    def reset_work(self):
        self.work = 0

    def decision(self, j: int, s: int) -> int:
        d = self.decisions.get((j, s))
        if d is not None:
            return d
        self.work += 1
        if self.work > self.budget:
            raise BudgetExceeded((j, s), self.budget)
        w = self.weights[j]
        u = self.src.uniform("st-range", j, s)
        c = 0.0
        d = None
        last_positive = -1
        for k in sorted(w.lam):
            lk = w.lam[k]
            if lk <= 0.0:
                continue
            last_positive = k
            c += lk
            if u < c:
                d = k
                break
        if d is None:
            if u < c + w.residual_mass + 1e-12:
                d = last_positive  # residual below tolerance folded into the last range
            else:
                d = last_positive
        self.decisions[(j, s)] = d
        return d

    def value(self, j: int, s: int) -> int:
        v = self.values.get((j, s))
        if v is not None:
            return v
        k = self.decision(j, s)
        w = self.weights[j]
        if k == -1:
            r1, _ = w.r_minus1
            v = 1 if self.src.uniform("st-value", j, s) < r1 / w.lam[-1] else 0
        else:
            low = s - 1 if k == 0 else s - k - 1
            x = {}
            for j2 in self.spec.v(j, k):
                for u in range(low, s):
                    x[(j2, u)] = self.value(j2, u)
            p1, _ = spacetime_p_k(self.spec, j, s, k, x, w)
            v = 1 if self.src.uniform("st-value", j, s) < p1 else 0
        self.values[(j, s)] = v
        return v


def _check_theorem2(spec: ModelSpec):
    m = max(reproduction_mean(spec, i)[0] for i in range(spec.neuron_count))
    if m >= 1.0:
        raise RegimeMismatch(
            f"space-time reproduction mean {m:.4g} >= 1; the ancestor process "
            "is not certified subcritical"
        )


def spacetime_sample(src: RandomCoordinateSource, spec: ModelSpec, neurons, window,
                     budget: int = DEFAULT_BUDGET, check_regime: bool = True) -> SpikeField:
    """Exact stationary sample via the space-time decomposition (summable
    memory, age-independent rates; no spontaneous field needed)."""
    t0, t1 = window
    if t1 <= t0:
        raise ValueError("empty window")
    if check_regime:
        _check_theorem2(spec)
    neurons = tuple(int(j) for j in neurons)
    resolver = _SpacetimeResolver(src, spec, budget)
    data = np.zeros((len(neurons), t1 - t0), dtype=np.int8)
    for a, j in enumerate(neurons):
        for b, t in enumerate(range(t0, t1)):
            resolver.reset_work()
            data[a, b] = resolver.value(j, t)
    return SpikeField(neurons, t0, t1, data)


def spacetime_clan(src: RandomCoordinateSource, spec: ModelSpec, i: int, t: int,
                   budget: int = DEFAULT_BUDGET) -> Clan:
    """Ancestor generations of the space-time construction: each site-time
    independently draws a range and contributes its whole block."""
    resolver = _SpacetimeResolver(src, spec, budget)

    def expand(j, s):
        k = resolver.decision(j, s)
        if k == -1:
            return set()
        if k == 0:
            return {(j, s - 1)}
        return {(j2, u) for j2 in spec.v(j, k) for u in range(s - k - 1, s)}

    generations = []
    prior: set = set()
    current = expand(i, t)
    total = 0
    while True:
        generations.append(current)
        total += len(current)
        if total > budget:
            raise BudgetExceeded((i, t), budget)
        if not current:
            break
        nxt = set()
        for (j, s) in current:
            nxt |= expand(j, s)
        prior |= current
        current = nxt - prior
    earliest = min((u for gen in generations for (_, u) in gen), default=t)
    return Clan((i, t), generations, dict(resolver.decisions), len(generations), earliest)
