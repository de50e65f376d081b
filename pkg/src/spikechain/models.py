"""Model definitions: spiking rate functions, aging functions, synaptic weights
and interaction neighborhoods.

A model describes the dynamics: at each time step every neuron spikes
independently with probability ``phi_i(sum_j W[i,j] * (g_j-weighted count of
j-spikes since i's own last spike), age of i)``.  ``W[i, j]`` is the synaptic
weight of neuron ``j`` acting on neuron ``i`` (row = postsynaptic target).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "PhiDescriptor",
    "AgingDescriptor",
    "ModelSpec",
    "MalformedSpec",
    "independent_preset",
    "two_neuron_preset",
    "three_neuron_preset",
    "exponential_memory_preset",
    "zd_window_preset",
    "graph_model",
]


class MalformedSpec(ValueError):
    """A model violates one of its structural invariants."""


# ---------------------------------------------------------------------------
# Rate functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiDescriptor:
    """Spiking rate function family.

    Families (all monotone nondecreasing and concave in the input ``s`` on
    ``s >= 0``, with spontaneous floor ``delta``):

    - ``saturated-linear``: ``min(1, delta + gamma * max(s, 0))``.
    - ``sigmoid-floor``: ``delta + (1 - delta) * (1 - exp(-max(s, 0)))``;
      its Lipschitz constant is ``1 - delta``.
    - ``age-modulated``: sigmoid-floor multiplied by ``1 - a * b**n`` in the
      excess over the floor, so the rate depends on the time ``n`` elapsed
      since the neuron's own last spike.
    """

    family: str
    delta: float
    gamma: float = 0.0
    age_a: float = 0.0
    age_b: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise MalformedSpec(f"delta must lie in (0, 1], got {self.delta}")
        if self.family not in ("saturated-linear", "sigmoid-floor", "age-modulated"):
            raise MalformedSpec(f"unknown phi family {self.family!r}")
        if self.family == "age-modulated" and not (0.0 <= self.age_a < 1.0 and 0.0 < self.age_b < 1.0):
            raise MalformedSpec("age-modulated needs 0 <= age_a < 1 and 0 < age_b < 1")

    @property
    def lipschitz(self) -> float:
        if self.family == "saturated-linear":
            return self.gamma
        return 1.0 - self.delta

    @property
    def age_dependent(self) -> bool:
        return self.family == "age-modulated" and self.age_a > 0.0

    def __call__(self, s, n=1):
        """Spike probability for input ``s`` and age ``n`` (vectorized in s)."""
        s = np.maximum(s, 0.0)
        if self.family == "saturated-linear":
            return np.minimum(1.0, self.delta + self.gamma * s)
        excess = (1.0 - self.delta) * (1.0 - np.exp(-s))
        if self.family == "sigmoid-floor":
            return self.delta + excess
        return self.delta + excess * (1.0 - self.age_a * self.age_b ** np.asarray(n, dtype=float))

    def to_dict(self) -> dict:
        d = {"family": self.family, "delta": self.delta, "gamma": self.gamma}
        if self.family == "age-modulated":
            d["age_a"] = self.age_a
            d["age_b"] = self.age_b
        return d


# ---------------------------------------------------------------------------
# Aging functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgingDescriptor:
    """Aging function g: how much a presynaptic spike m steps in the past
    still contributes.

    Families: ``constant-one`` (g == 1, non-summable), ``exponential``
    (``C * exp(-beta * n)``), ``power-law`` (``C * n**-p``), and
    ``finite-support`` (an explicit list ``values[0:M]`` for lags 1..M).
    """

    family: str
    C: float = 1.0
    beta: float = 1.0
    p: float = 2.0
    values: tuple = ()

    def __post_init__(self):
        if self.family not in ("constant-one", "exponential", "power-law", "finite-support"):
            raise MalformedSpec(f"unknown aging family {self.family!r}")
        if self.family == "finite-support":
            if len(self.values) == 0 or any(v < 0 for v in self.values):
                raise MalformedSpec("finite-support g needs a nonempty list of nonnegative values")
        if self.family in ("exponential", "power-law") and self.C < 0:
            raise MalformedSpec("C must be nonnegative")
        if self.family == "exponential" and self.beta <= 0:
            raise MalformedSpec("exponential g needs beta > 0")
        if self.family == "power-law" and self.p <= 0:
            raise MalformedSpec("power-law g needs p > 0")

    def __call__(self, n: int) -> float:
        """g(n) for lag n >= 1."""
        if n < 1:
            raise ValueError("aging function is defined for lags n >= 1")
        if self.family == "constant-one":
            return 1.0
        if self.family == "exponential":
            return self.C * math.exp(-self.beta * n)
        if self.family == "power-law":
            return self.C * n ** (-self.p)
        return float(self.values[n - 1]) if n <= len(self.values) else 0.0

    def cumulative(self, n: int) -> float:
        """Partial sum g(1) + ... + g(n)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        if n == 0:
            return 0.0
        if self.family == "constant-one":
            return float(n)
        if self.family == "exponential":
            q = math.exp(-self.beta)
            return self.C * q * (1.0 - q ** n) / (1.0 - q)
        if self.family == "finite-support":
            return float(math.fsum(self.values[: min(n, len(self.values))]))
        return float(math.fsum(m ** (-self.p) for m in range(1, n + 1))) * self.C

    def total(self) -> float:
        """Full sum over all lags; inf when the family is not summable."""
        if self.family == "constant-one":
            return math.inf
        if self.family == "exponential":
            q = math.exp(-self.beta)
            return self.C * q / (1.0 - q)
        if self.family == "finite-support":
            return float(math.fsum(self.values))
        if self.p <= 1.0:
            return math.inf
        from scipy.special import zeta

        return self.C * float(zeta(self.p, 1))

    def tail(self, n: int) -> float:
        """Sum of g over lags >= n (n >= 1)."""
        if n <= 1:
            return self.total()
        tot = self.total()
        if math.isinf(tot):
            return math.inf
        if self.family == "power-law":
            from scipy.special import zeta

            return self.C * float(zeta(self.p, n))
        return tot - self.cumulative(n - 1)

    @property
    def summable(self) -> bool:
        return not math.isinf(self.total())

    @property
    def support(self) -> int | None:
        """Support length M for finite-support g, else None."""
        if self.family != "finite-support":
            return None
        nz = [i + 1 for i, v in enumerate(self.values) if v > 0]
        return max(nz) if nz else 1

    @property
    def sup_value(self) -> float:
        """sup over lags of g(n)."""
        if self.family == "constant-one":
            return 1.0
        if self.family == "exponential":
            return self.C * math.exp(-self.beta)
        if self.family == "power-law":
            return self.C
        return float(max(self.values))

    def to_dict(self) -> dict:
        if self.family == "finite-support":
            return {"family": self.family, "values": list(self.values)}
        if self.family == "exponential":
            return {"family": self.family, "C": self.C, "beta": self.beta}
        if self.family == "power-law":
            return {"family": self.family, "C": self.C, "p": self.p}
        return {"family": self.family}


# ---------------------------------------------------------------------------
# Model spec
# ---------------------------------------------------------------------------

@dataclass
class ModelSpec:
    """A finite system of interacting spiking chains.

    Attributes
    ----------
    weights : (N, N) array, ``weights[i, j]`` = synaptic weight of j on i.
        Zero diagonal.
    phi : per-neuron rate descriptors (length N).
    g : per-neuron aging descriptors (length N).
    delta : spontaneous rate floor shared by all rate functions.
    gamma : Lipschitz constant of the rate functions.
    neighborhoods : per neuron, the growing sequence ``V_i(k)`` for k >= 0
        as a list of frozensets; ``V_i(0) == {i}`` and the last entry covers
        ``{i}`` plus all in-neighbors.  ``V_i(-1)`` is the empty set by
        convention and is not stored.
    """

    weights: np.ndarray
    phi: Sequence[PhiDescriptor]
    g: Sequence[AgingDescriptor]
    neighborhoods: list[list[frozenset]] = field(default=None)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        n = self.weights.shape[0]
        if self.weights.shape != (n, n):
            raise MalformedSpec("weights must be a square matrix")
        if np.any(np.diag(self.weights) != 0.0):
            raise MalformedSpec("self-weights must be zero")
        if isinstance(self.phi, PhiDescriptor):
            self.phi = [self.phi] * n
        if isinstance(self.g, AgingDescriptor):
            self.g = [self.g] * n
        self.phi = list(self.phi)
        self.g = list(self.g)
        if len(self.phi) != n or len(self.g) != n:
            raise MalformedSpec("phi and g must have one descriptor per neuron")
        deltas = {p.delta for p in self.phi}
        if len(deltas) != 1:
            raise MalformedSpec("all rate functions must share the same floor delta")
        if self.neighborhoods is None:
            self.neighborhoods = self._default_neighborhoods()
        self.neighborhoods = [[frozenset(v) for v in seq] for seq in self.neighborhoods]
        self._check_neighborhoods()

    # -- construction helpers ------------------------------------------------

    def _default_neighborhoods(self) -> list[list[frozenset]]:
        out = []
        for i in range(self.neuron_count):
            inn = frozenset(int(j) for j in np.nonzero(self.weights[i])[0])
            seq = [frozenset({i})]
            if inn - {i}:
                seq.append(frozenset({i}) | inn)
            out.append(seq)
        return out

    def _check_neighborhoods(self):
        for i, seq in enumerate(self.neighborhoods):
            if not seq or seq[0] != frozenset({i}):
                raise MalformedSpec(f"V_{i}(0) must equal {{{i}}}")
            cover = frozenset({i}) | frozenset(int(j) for j in np.nonzero(self.weights[i])[0])
            for a, b in zip(seq, seq[1:]):
                if not a <= b:
                    raise MalformedSpec(f"neighborhood sequence of neuron {i} is not growing")
                if a == b and a != cover:
                    raise MalformedSpec(
                        f"neighborhood sequence of neuron {i} stalls before covering its in-neighbors"
                    )
            if seq[-1] != cover:
                raise MalformedSpec(
                    f"neighborhood sequence of neuron {i} must end at its in-neighbors plus itself"
                )

    # -- queries ---------------------------------------------------------------

    @property
    def neuron_count(self) -> int:
        return self.weights.shape[0]

    @property
    def delta(self) -> float:
        return self.phi[0].delta

    @property
    def gamma(self) -> float:
        return max(p.lipschitz for p in self.phi)

    @property
    def attractive(self) -> bool:
        """Nonnegative weights; with monotone rate functions the extremal
        configurations attain all needed infima exactly."""
        return bool(np.all(self.weights >= 0.0))

    @property
    def age_dependent(self) -> bool:
        return any(p.age_dependent for p in self.phi)

    def v(self, i: int, k: int) -> frozenset:
        """Neighborhood V_i(k); k = -1 is empty, beyond saturation constant."""
        if k < 0:
            return frozenset()
        seq = self.neighborhoods[i]
        return seq[min(k, len(seq) - 1)]

    def k_sat(self, i: int) -> int:
        """Smallest k with V_i(k) covering {i} and all in-neighbors."""
        return len(self.neighborhoods[i]) - 1

    def residual_weight(self, i: int, k: int) -> float:
        """Sum of |W[i, j]| over j outside V_i(k)."""
        v = self.v(i, k)
        return float(math.fsum(abs(self.weights[i, j]) for j in range(self.neuron_count) if j not in v))

    def summability_sup(self) -> float:
        return float(np.max(np.sum(np.abs(self.weights), axis=1))) if self.neuron_count else 0.0

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "neuron_count": self.neuron_count,
            "weights": [[float(x) for x in row] for row in self.weights],
            "phi": [p.to_dict() for p in self.phi],
            "g": [g.to_dict() for g in self.g],
            "neighborhoods": [[sorted(v) for v in seq] for seq in self.neighborhoods],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def independent_preset(n: int = 1, delta: float = 0.3) -> ModelSpec:
    """n non-interacting neurons spiking i.i.d. at rate delta."""
    return ModelSpec(
        weights=np.zeros((n, n)),
        phi=PhiDescriptor("saturated-linear", delta=delta, gamma=0.0),
        g=AgingDescriptor("finite-support", values=(1.0,)),
    )


def two_neuron_preset(delta: float = 0.75, w: float = 1.0, gamma: float = 0.05) -> ModelSpec:
    """Two mutually exciting neurons with one-step memory.

    With the default parameters the model sits safely inside the
    spontaneous-spikes regime (its critical floor is ~0.63) and the chain on
    pairs of configurations is a 4-state Markov chain, so exact stationary
    quantities are available for cross-checks.
    """
    w_mat = np.array([[0.0, w], [w, 0.0]])
    return ModelSpec(
        weights=w_mat,
        phi=PhiDescriptor("saturated-linear", delta=delta, gamma=gamma),
        g=AgingDescriptor("finite-support", values=(1.0,)),
    )


def three_neuron_preset(delta: float = 0.8, w: float = 0.3, gamma: float = 0.05) -> ModelSpec:
    """Fully connected attractive 3-neuron system with unbounded memory
    (g == 1): each neuron accumulates all spikes since its own last spike."""
    w_mat = np.full((3, 3), w)
    np.fill_diagonal(w_mat, 0.0)
    return ModelSpec(
        weights=w_mat,
        phi=PhiDescriptor("saturated-linear", delta=delta, gamma=gamma),
        g=AgingDescriptor("constant-one"),
    )


def exponential_memory_preset(delta: float = 0.1, w: float = 1.0, beta: float = 2.0,
                              g_scale: float = 0.25) -> ModelSpec:
    """Two neurons with exponentially fading memory; the regime for the
    geometric loss-of-memory bound (the default scale keeps the dominating
    walk subcritical at decay rate beta)."""
    w_mat = np.array([[0.0, w], [w, 0.0]])
    return ModelSpec(
        weights=w_mat,
        phi=PhiDescriptor("sigmoid-floor", delta=delta),
        g=AgingDescriptor("exponential", C=g_scale, beta=beta),
    )


def zd_window_preset(radius: int = 3, d: int = 1, alpha: float = 2.0,
                     delta: float = 0.8, gamma: float = 0.02) -> ModelSpec:
    """Finite window of the lattice system with polynomially decaying weights
    ``W[i, j] = ||i - j||_1 ** -(2 d + alpha)`` and L1-ball neighborhoods.

    Only d = 1 windows are generated (neurons -radius..radius relabeled to
    0..2 radius).  Boundary neurons miss the weight mass of neighbors outside
    the window, so computed constants are for the restriction, not the full
    lattice.
    """
    if d != 1:
        raise NotImplementedError("only one-dimensional windows are generated")
    n = 2 * radius + 1
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                w[i, j] = abs(i - j) ** (-(2 * d + alpha))
    neigh = []
    for i in range(n):
        seq = [frozenset({i})]
        for k in range(1, n):
            ball = frozenset(j for j in range(n) if abs(j - i) <= k)
            if ball != seq[-1]:
                seq.append(ball)
            if len(ball) == n:
                break
        neigh.append(seq)
    return ModelSpec(
        weights=w,
        phi=PhiDescriptor("saturated-linear", delta=delta, gamma=gamma),
        g=AgingDescriptor("constant-one"),
        neighborhoods=neigh,
    )


def graph_model(adjacency: np.ndarray, delta: float, gamma: float,
                phi_family: str = "saturated-linear") -> ModelSpec:
    """Model whose 0/1 weight matrix comes from a directed graph adjacency
    (``adjacency[j, i]`` edge j -> i becomes ``weights[i, j]``), with one-step
    memory; the setting of the random-graph experiments."""
    w = np.asarray(adjacency, dtype=float).T.copy()
    np.fill_diagonal(w, 0.0)
    return ModelSpec(
        weights=w,
        phi=PhiDescriptor(phi_family, delta=delta, gamma=gamma),
        g=AgingDescriptor("finite-support", values=(1.0,)),
    )
