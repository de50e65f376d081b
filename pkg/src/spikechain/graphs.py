"""Critical directed Erdos-Renyi synaptic graphs and information return
times.

Edges are ordered pairs, no self-loops, each present independently with
probability ``p = (1 + theta/N) / N``.  The return time of a neuron is the
first generation at which its iterated out-frontier contains it again: the
length of the shortest directed cycle through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RandomCoordinateSource

__all__ = [
    "SynapticGraph",
    "sample_er_digraph",
    "return_time_tau",
    "tau_tail_bound",
    "estimate_tau_cdf",
    "event_A",
]


@dataclass
class SynapticGraph:
    """Directed graph on neurons 0..N-1 with sorted out-adjacency lists."""

    n: int
    theta: float
    out_edges: list  # out_edges[i]: sorted numpy array of targets

    def __post_init__(self):
        for i, targets in enumerate(self.out_edges):
            if np.any(np.asarray(targets) == i):
                raise ValueError("self-loops are not allowed")

    @property
    def p(self) -> float:
        return (1.0 + self.theta / self.n) / self.n

    @property
    def edge_count(self) -> int:
        return sum(len(t) for t in self.out_edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for i, targets in enumerate(self.out_edges):
            a[i, targets] = 1
        return a

    def edge_list_csv(self) -> str:
        lines = ["src,dst"]
        for i, targets in enumerate(self.out_edges):
            for j in targets:
                lines.append(f"{i},{int(j)}")
        return "\n".join(lines) + "\n"


def sample_er_digraph(n: int, theta: float, src: RandomCoordinateSource,
                      index: int = 0) -> SynapticGraph:
    """One critical digraph draw; ``index`` selects an independent replica.

    Drawn as a binomial edge count followed by a uniform choice of distinct
    ordered pairs, which has exactly the independent-edges law.
    """
    if n < 2:
        raise ValueError("need at least 2 neurons")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    p = (1.0 + theta / n) / n
    pairs_total = n * (n - 1)
    rng = src.numpy_generator("er-edges", index)
    count = rng.binomial(pairs_total, p)
    chosen = rng.choice(pairs_total, size=count, replace=False)
    rows = chosen // (n - 1)
    offs = chosen % (n - 1)
    targets = offs + (offs >= rows)
    order = np.lexsort((targets, rows))
    rows, targets = rows[order], targets[order]
    out_edges = []
    cut = np.searchsorted(rows, np.arange(n + 1))
    for i in range(n):
        out_edges.append(targets[cut[i]:cut[i + 1]].astype(np.int64))
    return SynapticGraph(n, theta, out_edges)


def return_time_tau(graph: SynapticGraph, i: int, k_max: int) -> int | None:
    """First n <= k_max with a directed walk of length exactly n from i back
    to i; None when no such n exists within the cap."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    frontier = set(int(j) for j in graph.out_edges[i])
    for n in range(1, k_max + 1):
        if n > 1:
            nxt = set()
            for j in frontier:
                nxt.update(int(v) for v in graph.out_edges[j])
            frontier = nxt
        if i in frontier:
            return n
        if not frontier:
            return None
    return None


def tau_tail_bound(n: int, theta: float, k: int) -> float:
    """Closed-form bound on P(return time <= k): (k-1)/N * exp(theta k / N)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (k - 1) / n * math.exp(theta * k / n)


def estimate_tau_cdf(n: int, theta: float, k: int, reps: int,
                     src: RandomCoordinateSource) -> tuple[float, float]:
    """Monte Carlo estimate of P(return time of neuron 0 <= k) over fresh
    graphs, with its binomial standard error."""
    if reps < 100:
        raise ValueError("use at least 100 replicas")
    hits = 0
    for r in range(reps):
        g = sample_er_digraph(n, theta, src.substream("tau-cdf", r))
        tau = return_time_tau(g, 0, k)
        if tau is not None:
            hits += 1
    p_hat = hits / reps
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / reps) / reps)
    return p_hat, se


def event_A(graph: SynapticGraph, i: int, k_n: int | None = None) -> bool:
    """True when no directed cycle through i has length <= 2 k(N)
    (k(N) defaults to floor(sqrt(N)))."""
    if k_n is None:
        k_n = int(math.isqrt(graph.n))
    return return_time_tau(graph, i, 2 * k_n) is None
