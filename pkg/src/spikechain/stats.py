"""Spike-train statistics and the random-graph experiments.

Covers spike-time extraction, the adjacent inter-spike-interval covariance
estimator with batch-means errors, the closed-form decorrelation bound with
its Monte Carlo harness, the cycle-locality check of conditional kernels,
and the loss-of-memory decay profile under extremal artificial pasts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import SpikeField
from .forward import simulate_support1_batch
from .graphs import event_A, return_time_tau, sample_er_digraph
from .models import ModelSpec, PhiDescriptor, graph_model
from .rng import RandomCoordinateSource

__all__ = [
    "TooFewSpikes",
    "ConditioningTooRare",
    "SpikeTrainStats",
    "extract_spikes",
    "adjacent_isi_covariance",
    "spike_train_stats",
    "theorem4_bound",
    "theorem4_experiment",
    "locality_check",
    "loss_of_memory_profile",
]


class TooFewSpikes(ValueError):
    """Not enough spikes for the requested estimator."""


class ConditioningTooRare(RuntimeError):
    """The conditioning pattern occurs too rarely for rejection estimates."""


# ---------------------------------------------------------------------------
# Spike trains and interval statistics
# ---------------------------------------------------------------------------

def extract_spikes(f: SpikeField, i: int) -> np.ndarray:
    """Sorted spike times of neuron i."""
    col = f.column(i)
    return f.t_start + np.nonzero(col)[0]


def adjacent_isi_covariance(spike_times, min_spikes: int = 1000,
                            min_batches: int = 20) -> tuple[float, float]:
    """Lag-1 covariance of the inter-spike-interval sequence.

    Overlapping-pairs estimator with the global interval mean; the standard
    error comes from batch means over contiguous pair blocks (at least 20
    batches).  Deterministic reduction (fsum) so results do not depend on
    accumulation order.
    """
    times = np.asarray(spike_times, dtype=np.int64)
    if len(times) < max(min_spikes, 3):
        raise TooFewSpikes(f"need at least {max(min_spikes, 3)} spikes, got {len(times)}")
    if np.any(np.diff(times) <= 0):
        raise ValueError("spike times must be strictly increasing")
    isi = np.diff(times).astype(float)
    mean = math.fsum(isi) / len(isi)
    prods = (isi[:-1] - mean) * (isi[1:] - mean)
    n_pairs = len(prods)
    estimate = math.fsum(prods) / n_pairs
    nb = min_batches
    batch_size = n_pairs // nb
    if batch_size < 1:
        raise TooFewSpikes("too few interval pairs for batch means")
    batch_vals = [
        math.fsum(prods[b * batch_size:(b + 1) * batch_size]) / batch_size
        for b in range(nb)
    ]
    bmean = math.fsum(batch_vals) / nb
    var = math.fsum((v - bmean) ** 2 for v in batch_vals) / (nb - 1)
    se = math.sqrt(var / nb)
    return estimate, se


@dataclass
class SpikeTrainStats:
    spike_times: np.ndarray
    isi: np.ndarray
    mean_isi: float
    mean_isi_se: float
    adjacent_cov: float
    adjacent_cov_se: float
    batch_count: int

    def to_dict(self) -> dict:
        return {
            "spike_count": int(len(self.spike_times)),
            "mean_isi": self.mean_isi,
            "mean_isi_se": self.mean_isi_se,
            "adjacent_cov": self.adjacent_cov,
            "adjacent_cov_se": self.adjacent_cov_se,
            "batch_count": self.batch_count,
        }


def spike_train_stats(spike_times, min_spikes: int = 1000, min_batches: int = 20) -> SpikeTrainStats:
    times = np.asarray(spike_times, dtype=np.int64)
    cov, cov_se = adjacent_isi_covariance(times, min_spikes, min_batches)
    isi = np.diff(times).astype(float)
    nb = min_batches
    bs = len(isi) // nb
    batch_means = [math.fsum(isi[b * bs:(b + 1) * bs]) / bs for b in range(nb)]
    mean = math.fsum(isi) / len(isi)
    bm = math.fsum(batch_means) / nb
    mean_se = math.sqrt(math.fsum((v - bm) ** 2 for v in batch_means) / (nb - 1) / nb)
    return SpikeTrainStats(times, isi, mean, mean_se, cov, cov_se, nb)


# ---------------------------------------------------------------------------
# Decorrelation bound and its Monte Carlo harness
# ---------------------------------------------------------------------------

def theorem4_bound(n: int, delta: float) -> float:
    """Closed-form bound on the adjacent-interval covariance magnitude for
    systems on good graphs: 3 / delta^2 * N * (1 - delta)^sqrt(N)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    return 3.0 / delta ** 2 * n * (1.0 - delta) ** math.sqrt(n)


@dataclass
class Theorem4Report:
    n: int
    theta: float
    delta: float
    graphs: int
    a_graphs: int
    p_ac: float
    p_ac_se: float
    p_ac_bound: float
    bound: float
    cov_estimates: list
    cov_ses: list
    median_abs_cov: float
    seed: int
    spec_hashes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "theta": self.theta, "delta": self.delta,
            "graphs": self.graphs, "a_graphs": self.a_graphs,
            "p_ac": self.p_ac, "p_ac_se": self.p_ac_se, "p_ac_bound": self.p_ac_bound,
            "bound": self.bound, "median_abs_cov": self.median_abs_cov,
            "cov_estimates": self.cov_estimates, "cov_ses": self.cov_ses,
            "seed": self.seed,
        }


def theorem4_experiment(n: int, theta: float, delta: float, gamma: float,
                        reps: int, horizon: int, src: RandomCoordinateSource,
                        burnin: int = 200, min_spikes: int = 200,
                        phi_family: str = "saturated-linear") -> Theorem4Report:
    """Sample graphs, keep those whose neuron 0 has no short feedback cycle,
    run the one-step-memory dynamics on them, and estimate the adjacent
    interval covariance of neuron 0 per kept graph."""
    phi = PhiDescriptor(phi_family, delta=delta, gamma=gamma)
    k_n = int(math.isqrt(n))
    graphs = []
    not_a = 0
    for r in range(reps):
        g = sample_er_digraph(n, theta, src.substream("t4-graph", r))
        if event_A(g, 0, k_n):
            graphs.append(g)
        else:
            not_a += 1
    p_ac = not_a / reps
    p_ac_se = math.sqrt(max(p_ac * (1 - p_ac), 1.0 / reps) / reps)
    covs, ses, hashes = [], [], []
    if graphs:
        stack = np.stack([g.adjacency().T.astype(float) for g in graphs])
        np.einsum("gii->gi", stack)[:] = 0.0
        track = simulate_support1_batch(stack, phi, horizon, burnin,
                                        src.substream("t4-sim", 0), track=0)
        for row, g in zip(track, graphs):
            times = np.nonzero(row)[0]
            try:
                cov, se = adjacent_isi_covariance(times, min_spikes=min_spikes)
            except TooFewSpikes:
                continue
            covs.append(cov)
            ses.append(se)
            hashes.append(graph_model(g.adjacency(), delta, gamma, phi_family).spec_hash())
    median = float(np.median(np.abs(covs))) if covs else math.nan
    return Theorem4Report(
        n=n, theta=theta, delta=delta, graphs=reps, a_graphs=len(graphs),
        p_ac=p_ac, p_ac_se=p_ac_se,
        p_ac_bound=math.exp(2 * theta) / math.sqrt(n),
        bound=theorem4_bound(n, delta),
        cov_estimates=covs, cov_ses=ses, median_abs_cov=median,
        seed=src.master_seed, spec_hashes=hashes,
    )


# ---------------------------------------------------------------------------
# Cycle locality of conditional kernels
# ---------------------------------------------------------------------------

@dataclass
class LocalityReport:
    applicable: bool
    tau: int | None
    pattern_frequency: float
    estimates: dict
    ses: dict
    max_gap: float
    max_gap_limit: float
    passed: bool
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable, "tau": self.tau,
            "pattern_frequency": self.pattern_frequency,
            "estimates": {str(k): v for k, v in self.estimates.items()},
            "max_gap": self.max_gap, "max_gap_limit": self.max_gap_limit,
            "passed": self.passed, "seed": self.seed,
        }


def locality_check(graph, i: int, k: int, l: int, delta: float, gamma: float,
                   reps: int, src: RandomCoordinateSource, horizon: int = 20000,
                   min_frequency: float = 1e-4) -> LocalityReport:
    """Estimate the spike probability after the own-history pattern
    [suffix a, spike, k-1 silences] for every suffix a of length l, by
    scanning long trajectories; when no directed cycle through i has length
    <= k + l the estimates must agree (within joint 3 sigma).
    """
    if l > 6:
        raise ValueError("suffix length is capped at 6")
    tau = return_time_tau(graph, i, k + l)
    applicable = tau is None
    phi = PhiDescriptor("saturated-linear", delta=delta, gamma=gamma)
    stack = graph.adjacency().T.astype(float)[None, :, :].repeat(reps, axis=0)
    np.einsum("gii->gi", stack)[:] = 0.0
    track = simulate_support1_batch(stack, phi, horizon, 100,
                                    src.substream("locality", 0), track=i)
    pat_len = l + k  # suffix, spike, k-1 zeros; next symbol is the estimand
    counts: dict = {}
    hits: dict = {}
    total_positions = 0
    pattern_hits = 0
    mid = np.concatenate([[1], np.zeros(k - 1)]) if k > 1 else np.array([1.0])
    for row in track.astype(float):
        total_positions += max(0, len(row) - pat_len)
        for start in range(0, len(row) - pat_len):
            window = row[start:start + pat_len]
            if not np.array_equal(window[l:], mid):
                continue
            pattern_hits += 1
            suffix = tuple(int(v) for v in window[:l])
            counts[suffix] = counts.get(suffix, 0) + 1
            hits[suffix] = hits.get(suffix, 0) + int(row[start + pat_len])
    freq = pattern_hits / max(total_positions, 1)
    if freq < min_frequency:
        raise ConditioningTooRare(
            f"pattern frequency {freq:.2e} below {min_frequency:.0e}"
        )
    estimates = {}
    ses = {}
    for suffix, c in counts.items():
        if c < 50:
            continue
        p_hat = hits[suffix] / c
        estimates[suffix] = p_hat
        ses[suffix] = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / c) / c)
    keys = list(estimates)
    max_gap = 0.0
    limit_at_max = math.inf
    agreement = True
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            gap = abs(estimates[keys[a]] - estimates[keys[b]])
            limit = 3.0 * math.hypot(ses[keys[a]], ses[keys[b]])
            if gap > max_gap:
                max_gap = gap
                limit_at_max = limit
            if gap > limit:
                agreement = False
    # without the cycle-length certificate the containment makes no claim
    passed = agreement if applicable else True
    return LocalityReport(applicable, tau, freq, estimates, ses, max_gap,
                          limit_at_max, passed, seed=src.master_seed)


# ---------------------------------------------------------------------------
# Loss-of-memory decay profile
# ---------------------------------------------------------------------------

@dataclass
class MemoryProfile:
    s_grid: list
    differences: list
    ses: list
    anchor_constant: float
    inverse_bound: list       # anchor / (s - 1) per grid point
    log_slope: float | None   # least-squares slope of log differences
    slope_points: int
    seed: int
    spec_hash: str

    def to_dict(self) -> dict:
        return {
            "s_grid": self.s_grid, "differences": self.differences, "ses": self.ses,
            "anchor_constant": self.anchor_constant,
            "inverse_bound": self.inverse_bound,
            "log_slope": self.log_slope, "slope_points": self.slope_points,
            "seed": self.seed, "spec_hash": self.spec_hash,
        }


def _batch_states(spec: ModelSpec, reps: int, quiet: bool):
    """Vectorized chain state over replicas for the two extremal pasts."""
    from .forward import _make_plan

    plan = _make_plan(spec)
    n = spec.neuron_count
    config = np.ones((reps, n), dtype=np.int8)
    ages = np.full((reps, n), 10 ** 6 if quiet else 1, dtype=np.int64)
    counters = None
    ring = []
    if plan.recursive:
        g1 = np.array([g(1) for g in spec.g])
        counters = np.zeros((reps, n, n)) if quiet else np.tile(g1, (reps, n, 1))
    else:
        first = np.zeros((reps, n), dtype=np.int8) if quiet else np.ones((reps, n), dtype=np.int8)
        ring = [first] + [np.zeros((reps, n), dtype=np.int8) for _ in range(plan.ring_len - 1)]
    return plan, [config, ages, counters, ring]


def _batch_step(spec: ModelSpec, plan, state, u: np.ndarray):
    """One coupled step of a batch of replicas driven by shared uniforms."""
    config, ages, counters, ring = state
    reps, n = config.shape
    if plan.recursive:
        arg = np.einsum("ij,rij->ri", spec.weights, counters)
    else:
        arg = np.zeros((reps, n))
        for m, past in enumerate(ring, start=1):
            contrib = plan.ring_weights[m - 1] * past
            arg += np.where(ages >= m, contrib @ spec.weights.T, 0.0)
    rates = _rates_batch(spec, arg, ages)
    new_config = (u < rates).astype(np.int8)
    new_ages = np.where(new_config == 1, 1, ages + 1)
    if plan.recursive:
        keep = (new_config == 0)[:, :, None].astype(float)
        counters = (counters * keep + (plan.c0 * new_config)[:, None, :]) * plan.q[None, None, :]
        return [new_config, new_ages, counters, ring]
    ring = [new_config.copy()] + ring[: plan.ring_len - 1]
    return [new_config, new_ages, None, ring]


def _rates_batch(spec: ModelSpec, arg: np.ndarray, ages: np.ndarray) -> np.ndarray:
    phi0 = spec.phi[0]
    if all(p == phi0 for p in spec.phi):
        return np.asarray(phi0(arg, ages), dtype=float)
    cols = [np.asarray(spec.phi[i](arg[:, i], ages[:, i]), dtype=float)
            for i in range(arg.shape[1])]
    return np.column_stack(cols)


def loss_of_memory_profile(spec: ModelSpec, i: int, s_grid, horizon: int,
                           reps: int, src: RandomCoordinateSource) -> MemoryProfile:
    """Difference in the spike probability of neuron i at each grid time,
    between the two extremal artificial pasts (everyone spiked at time 0 vs
    a long quiet stretch), estimated over coupled replicas (both runs share
    the per-coordinate uniforms, so the indicator of disagreement bounds the
    estimator variance).
    """
    s_grid = sorted(int(s) for s in s_grid)
    if s_grid[0] < 1 or s_grid[-1] > horizon:
        raise ValueError("grid times must lie in [1, horizon]")
    n = spec.neuron_count
    plan, st1 = _batch_states(spec, reps, quiet=False)
    _, st2 = _batch_states(spec, reps, quiet=True)
    ids = np.arange(reps * n)
    count1 = {s: 0 for s in s_grid}
    count2 = {s: 0 for s in s_grid}
    diff_ct = {s: 0 for s in s_grid}
    for t in range(1, horizon + 1):
        u = src.uniform_array("memory", ids, t).reshape(reps, n)
        st1 = _batch_step(spec, plan, st1, u)
        st2 = _batch_step(spec, plan, st2, u)
        if t in count1:
            c1 = st1[0][:, i]
            c2 = st2[0][:, i]
            count1[t] = int(c1.sum())
            count2[t] = int(c2.sum())
            diff_ct[t] = int((c1 != c2).sum())
    diffs, ses = [], []
    for s in s_grid:
        d = abs(count1[s] - count2[s]) / reps
        pd = diff_ct[s] / reps
        ses.append(math.sqrt(max(pd, 1.0 / reps) / reps))
        diffs.append(d)
    anchor = diffs[0] * (s_grid[0] - 1) if s_grid[0] > 1 else diffs[0]
    inverse_bound = [anchor / (s - 1) if s > 1 else math.inf for s in s_grid]
    # geometric fit over grid points with signal above noise
    pts = [(s, d) for s, d, se in zip(s_grid, diffs, ses) if d > 3.0 * se and d > 0.0]
    slope = None
    if len(pts) >= 3:
        xs = np.array([p[0] for p in pts], dtype=float)
        ys = np.log([p[1] for p in pts])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return MemoryProfile(
        s_grid=s_grid, differences=diffs, ses=ses, anchor_constant=anchor,
        inverse_bound=inverse_bound, log_slope=slope, slope_points=len(pts),
        seed=src.master_seed, spec_hash=spec.spec_hash(),
    )
