"""Forward dynamics on finite systems, plus exact small-instance oracles.

Each step, every neuron spikes independently with probability
``phi_i(sum_j W[i,j] * (aging-weighted count of j-spikes since i's last
spike), age_i)``.  The aging-weighted counts are maintained exactly:

- ``constant-one`` and ``exponential`` aging admit an O(N^2) recursion
  (reset on own spike, decay plus the newest configuration otherwise);
- ``finite-support`` aging reads a ring of the last M configurations;
- ``power-law`` aging is truncated at a lag cap with a reported tail error.

For one-step memory (support-1 aging, age-independent rates) the chain on
configurations is a finite Markov chain; the oracle computes its stationary
law and exact inter-spike-interval moments by linear solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import SpikeField
from .models import AgingDescriptor, ModelSpec
from .rng import RandomCoordinateSource

__all__ = [
    "UnboundedMemory",
    "StateSpaceTooLarge",
    "Degenerate",
    "ChainState",
    "initial_state",
    "step",
    "simulate",
    "MarkovOracle",
    "exact_stationary",
    "isi_moments",
    "simulate_support1_batch",
]

_RING_CAP = 100_000
_TAIL_TOL = 1e-10


class UnboundedMemory(ValueError):
    """The aging functions cannot be handled exactly or within the lag cap."""


class StateSpaceTooLarge(ValueError):
    """The exact oracle is limited to at most 12 neurons."""


class Degenerate(ValueError):
    """A neuron never spikes (impossible with a positive rate floor)."""


# ---------------------------------------------------------------------------
# Accumulation strategies
# ---------------------------------------------------------------------------

@dataclass
class _Plan:
    recursive: bool
    q: np.ndarray | None = None        # per-column decay
    c0: np.ndarray | None = None       # per-column injection scale
    ring_len: int = 0
    ring_weights: np.ndarray | None = None  # (ring_len, N): g_j(m) per lag m, column j
    tail_error: float = 0.0


def _make_plan(spec: ModelSpec, ring_cap: int | None = None) -> _Plan:
    n = spec.neuron_count
    fams = {g.family for g in spec.g}
    if fams <= {"constant-one", "exponential"}:
        q = np.ones(n)
        c0 = np.ones(n)
        for j, g in enumerate(spec.g):
            if g.family == "exponential":
                q[j] = math.exp(-g.beta)
                c0[j] = g.C
        return _Plan(recursive=True, q=q, c0=c0)
    if fams <= {"finite-support"}:
        m = max(len(g.values) for g in spec.g)
        w = np.zeros((m, n))
        for j, g in enumerate(spec.g):
            for lag in range(1, len(g.values) + 1):
                w[lag - 1, j] = g.values[lag - 1]
        return _Plan(recursive=False, ring_len=m, ring_weights=w)
    # general summable families: truncate at a lag cap with a quantified tail
    caps = []
    for g in spec.g:
        if not g.summable:
            raise UnboundedMemory(
                f"aging family {g.family!r} mixes with others or is not summable; "
                "no exact recursion applies"
            )
        cap = ring_cap
        if cap is None:
            cap = 1
            while g.tail(cap + 1) * spec.gamma * spec.summability_sup() > _TAIL_TOL:
                cap *= 2
                if cap > _RING_CAP:
                    raise UnboundedMemory(
                        "no lag cap below the ring limit meets the tail tolerance; "
                        "pass ring_cap explicitly to accept the truncation"
                    )
        caps.append(cap)
    m = max(caps)
    w = np.zeros((m, n))
    for j, g in enumerate(spec.g):
        for lag in range(1, m + 1):
            w[lag - 1, j] = g(lag)
    tail = max(g.tail(m + 1) for g in spec.g) * spec.gamma * spec.summability_sup()
    return _Plan(recursive=False, ring_len=m, ring_weights=w, tail_error=tail)


# ---------------------------------------------------------------------------
# Chain state and stepping
# ---------------------------------------------------------------------------

@dataclass
class ChainState:
    """State at logical time t: the last configuration, per-neuron ages
    (1 means the neuron spiked at t-1), exact recursive accumulators
    ``counters[i, j]``, and the ring of recent configurations (newest
    first) when the aging functions need one."""

    t: int
    config: np.ndarray
    ages: np.ndarray
    counters: np.ndarray | None = None
    ring: list = field(default_factory=list)
    tail_error: float = 0.0


def initial_state(spec: ModelSpec, ring_cap: int | None = None) -> ChainState:
    """Bootstrap history: every neuron spiked at time -1."""
    plan = _make_plan(spec, ring_cap)
    n = spec.neuron_count
    ones = np.ones(n, dtype=np.int8)
    counters = None
    ring = []
    if plan.recursive:
        g1 = np.array([g(1) for g in spec.g])
        counters = np.tile(g1, (n, 1))
    else:
        ring = [ones.copy()] + [np.zeros(n, dtype=np.int8) for _ in range(plan.ring_len - 1)]
    state = ChainState(0, ones.copy(), np.ones(n, dtype=np.int64), counters, ring,
                       plan.tail_error)
    state._plan = plan
    return state


def _plan_of(state: ChainState, spec: ModelSpec) -> _Plan:
    plan = getattr(state, "_plan", None)
    if plan is None:
        plan = _make_plan(spec)
        state._plan = plan
    return plan


def drive_state(state: ChainState, spec: ModelSpec) -> np.ndarray:
    """Aging-weighted presynaptic input of each neuron at the current time."""
    n = spec.neuron_count
    plan = _plan_of(state, spec)
    if plan.recursive:
        return np.einsum("ij,ij->i", spec.weights, state.counters)
    arg = np.zeros(n)
    for m, past in enumerate(state.ring, start=1):
        contrib = plan.ring_weights[m - 1] * past
        if not np.any(contrib):
            continue
        arg += np.where(state.ages >= m, spec.weights @ contrib, 0.0)
    return arg


def _rates(spec: ModelSpec, arg: np.ndarray, ages: np.ndarray) -> np.ndarray:
    phi0 = spec.phi[0]
    if all(p is phi0 or p == phi0 for p in spec.phi):
        return np.asarray(phi0(arg, ages), dtype=float)
    return np.array([float(spec.phi[i](arg[i], int(ages[i]))) for i in range(len(arg))])


def step(state: ChainState, spec: ModelSpec, src: RandomCoordinateSource) -> ChainState:
    """One synchronous update; returns a fresh state (no mutation)."""
    n = spec.neuron_count
    plan = _plan_of(state, spec)
    arg = drive_state(state, spec)
    rates = _rates(spec, arg, state.ages)
    u = src.uniform_array("step", np.arange(n), state.t)
    new_config = (u < rates).astype(np.int8)
    new_ages = np.where(new_config == 1, 1, state.ages + 1)
    counters = None
    ring = []
    if plan.recursive:
        keep = (new_config == 0).astype(float)[:, None]
        counters = (state.counters * keep + (plan.c0 * new_config)[None, :]) * plan.q[None, :]
    else:
        ring = [new_config.copy()] + state.ring[: plan.ring_len - 1]
    out = ChainState(state.t + 1, new_config, new_ages, counters, ring, plan.tail_error)
    out._plan = plan
    return out


def simulate(spec: ModelSpec, horizon: int, burnin: int, src: RandomCoordinateSource,
             state: ChainState | None = None) -> SpikeField:
    """Raster of ``horizon`` post-burn-in steps (times relabeled 0..horizon-1)."""
    if horizon < 0 or burnin < 0:
        raise ValueError("horizon and burnin must be nonnegative")
    n = spec.neuron_count
    if state is None:
        state = initial_state(spec)
    data = np.zeros((n, horizon), dtype=np.int8)
    for k in range(burnin + horizon):
        state = step(state, spec, src)
        if k >= burnin:
            data[:, k - burnin] = state.config
    return SpikeField(tuple(range(n)), 0, horizon, data)


# ---------------------------------------------------------------------------
# Batched one-step-memory simulator (experiment workhorse)
# ---------------------------------------------------------------------------

def simulate_support1_batch(weight_stack: np.ndarray, phi, horizon: int, burnin: int,
                            src: RandomCoordinateSource, track: int = 0,
                            tag: str = "batch") -> np.ndarray:
    """Simulate many one-step-memory systems in lockstep and record one
    neuron's spikes.

    ``weight_stack[g, i, j]`` is the weight of j on i in system g; ``phi``
    is a shared age-independent rate function.  Returns the (systems,
    horizon) 0/1 record of neuron ``track``.
    """
    gcount, n, _ = weight_stack.shape
    ids = np.arange(gcount * n)
    x = np.ones((gcount, n))
    out = np.zeros((gcount, horizon), dtype=np.int8)
    for t in range(burnin + horizon):
        arg = np.einsum("gij,gj->gi", weight_stack, x)
        rates = phi(arg)
        u = src.uniform_array(tag, ids, t).reshape(gcount, n)
        x = (u < rates).astype(float)
        if t >= burnin:
            out[:, t - burnin] = x[:, track]
    return out


# ---------------------------------------------------------------------------
# Exact finite Markov oracle (one-step memory)
# ---------------------------------------------------------------------------

@dataclass
class MarkovOracle:
    """Dense transition operator of the configuration chain, its stationary
    law, and spike rates, for a support-1 model with at most 12 neurons."""

    n: int
    operator: np.ndarray
    stationary: np.ndarray

    def spike_rate(self, i: int) -> float:
        states = np.arange(2 ** self.n)
        return float(self.stationary[(states >> i) & 1 == 1].sum())

    def to_dict(self) -> dict:
        return {
            "state_count": 2 ** self.n,
            "rates": [self.spike_rate(i) for i in range(self.n)],
        }


def _require_support1(spec: ModelSpec):
    for g in spec.g:
        if g.family != "finite-support" or g.support != 1:
            raise UnboundedMemory("the exact oracle needs one-step aging functions")
    if spec.age_dependent:
        raise UnboundedMemory("the exact oracle needs age-independent rates")


def exact_stationary(spec: ModelSpec) -> MarkovOracle:
    """Stationary law of the configuration chain by dense linear solve,
    verified as a fixed point to 1e-12."""
    _require_support1(spec)
    n = spec.neuron_count
    if n > 12:
        raise StateSpaceTooLarge(f"{n} neurons give {2**n} states; the cap is 12")
    g1 = np.array([g(1) for g in spec.g])
    w_eff = spec.weights * g1[None, :]
    states = np.arange(2 ** n)
    bits = ((states[:, None] >> np.arange(n)[None, :]) & 1).astype(float)  # (S, n)
    args = bits @ w_eff.T
    p_spike = np.column_stack([spec.phi[i](args[:, i]) for i in range(n)])  # (S, n)
    size = 2 ** n
    op = np.ones((size, size))
    for i in range(n):
        target_bit = ((states >> i) & 1).astype(bool)[None, :]
        pi_col = p_spike[:, i][:, None]
        op *= np.where(target_bit, pi_col, 1.0 - pi_col)
    row_err = np.max(np.abs(op.sum(axis=1) - 1.0))
    if row_err > 1e-12:
        raise AssertionError(f"transition rows sum to 1 only within {row_err:g}")
    a = op.T - np.eye(size)
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    for _ in range(200):
        nxt = pi @ op
        if np.max(np.abs(nxt - pi)) < 1e-15:
            pi = nxt
            break
        pi = nxt
    if np.max(np.abs(pi @ op - pi)) > 1e-12:
        raise AssertionError("stationary vector is not a fixed point to 1e-12")
    return MarkovOracle(n, op, pi)


def isi_moments(oracle: MarkovOracle, i: int) -> tuple[float, float]:
    """Exact mean inter-spike interval and adjacent-interval covariance of
    neuron i, from first-passage solves on the chain watched at its spike
    epochs."""
    n, op, pi = oracle.n, oracle.operator, oracle.stationary
    states = np.arange(2 ** n)
    in_b = ((states >> i) & 1) == 1
    b_idx = states[in_b]
    c_idx = states[~in_b]
    pi_b = pi[b_idx]
    if pi_b.sum() <= 0.0:
        raise Degenerate(f"neuron {i} never spikes under the stationary law")
    pi_b = pi_b / pi_b.sum()
    p_bb = op[np.ix_(b_idx, b_idx)]
    p_bc = op[np.ix_(b_idx, c_idx)]
    p_cb = op[np.ix_(c_idx, b_idx)]
    p_cc = op[np.ix_(c_idx, c_idx)]
    eye_c = np.eye(len(c_idx))
    solve = np.linalg.solve
    if len(c_idx):
        h_c = solve(eye_c - p_cc, np.ones(len(c_idx)))
        h_b = 1.0 + p_bc @ h_c
        hit = solve(eye_c - p_cc, p_cb)          # P_y(return lands at b')
        usum = solve(eye_c - p_cc, p_cb + p_cc @ hit)  # E_y[T 1_{lands at b'}]
        f = p_bb + p_bc @ (hit + usum)
        q = p_bb + p_bc @ hit
    else:
        h_b = np.ones(len(b_idx))
        f = p_bb
        q = p_bb
    if np.max(np.abs(f.sum(axis=1) - h_b)) > 1e-9:
        raise AssertionError("first-passage decomposition is inconsistent")
    if np.max(np.abs(pi_b @ q - pi_b)) > 1e-9:
        raise AssertionError("spike-epoch chain is not stationary under the restricted law")
    mean_isi = float(pi_b @ h_b)
    e_prod = float(pi_b @ (f @ h_b))
    return mean_isi, e_prod - mean_isi ** 2
