"""Two-block stochastic block models and the linear parameter families.

The block matrix is [[a, b], [b, c]]: a is the within-block-1 edge
probability, c within block 2, b between. Both blocks have the same size n,
so N = 2n nodes, with nodes 0..n-1 in block 1.

Two expected-edge conventions coexist on purpose. `expected_edges_paper`
counts C(n,2)*(a+b+c), the closed form used to design the equal-density
families (it treats the n^2 inter-block pairs as if there were C(n,2) of
them). `expected_edges_exact` sums the upper triangle of the probability
matrix, which is what density adjustment in resampling needs. They disagree
whenever b > 0; both are part of the contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import Graph

__all__ = [
    "BlockMatrix", "SbmParams", "SbmFamily", "ConnectivityExhausted",
    "ConnectedSample", "family_point", "edge_probability_matrix",
    "sample_er", "sample_connected", "expected_edges_paper",
    "expected_edges_exact", "classify_structure", "validate_prob_matrix",
    "FAMILY_DELTAS", "DEFAULT_THETA_GRIDS",
]

# Direction each family moves (da, db, dc) per unit theta.
FAMILY_DELTAS = {
    "M1": (-1.0, 0.0, 1.0),
    "M2": (0.0, -1.0, 1.0),
    "M3": (0.0, 1.0, 0.0),
    "M4": (-1.0, 1.0, 0.0),
}

DEFAULT_THETA_GRIDS = {
    "M1": (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35),
    "M2": (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35),
    "M3": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7),
    "M4": (0.0, 0.1, 0.2, 0.3, 0.35),
}

DEFAULT_BASES = {
    "M1": (0.75, 0.05, 0.05),
    "M2": (0.75, 0.75, 0.05),
    "M3": (0.75, 0.05, 0.05),
    "M4": (0.75, 0.05, 0.05),
}


class ConnectivityExhausted(RuntimeError):
    """Raised when no connected sample appears within the retry budget."""

    def __init__(self, tries: int):
        super().__init__(f"no connected graph in {tries} tries")
        self.tries = tries
        self.rejects = tries


@dataclass(frozen=True)
class BlockMatrix:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"block probability {name}={v} outside [0,1]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class SbmParams:
    """Equal-block-size model: N = 2n, nodes 0..n-1 are block 1."""

    n: int
    block: BlockMatrix

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("per-block size n must be >= 1")

    @property
    def n_nodes(self) -> int:
        return 2 * self.n

    @property
    def membership(self) -> tuple[int, ...]:
        return (1,) * self.n + (2,) * self.n


@dataclass(frozen=True)
class SbmFamily:
    """Linear curve (a,b,c)(theta) = base + theta*delta, theta in [0, theta_max]."""

    base: BlockMatrix
    delta: tuple[float, float, float]
    theta_max: float
    family_id: str = "M1"

    def __post_init__(self):
        if self.family_id not in FAMILY_DELTAS:
            raise ValueError(f"unknown family {self.family_id!r}")
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if self.delta != FAMILY_DELTAS[self.family_id]:
            raise ValueError(
                f"delta {self.delta} does not match family {self.family_id}")
        if self.theta_max < 0:
            raise ValueError("theta_max must be nonnegative")
        # Entries must stay inside [0,1] across the whole curve; linearity
        # means checking the endpoints suffices.
        family_point(self, 0.0)
        family_point(self, self.theta_max)

    @classmethod
    def preset(cls, family_id: str, base: Optional[Sequence[float]] = None,
               theta_max: Optional[float] = None) -> "SbmFamily":
        grid = DEFAULT_THETA_GRIDS[family_id]
        b = DEFAULT_BASES[family_id] if base is None else tuple(base)
        tm = grid[-1] if theta_max is None else float(theta_max)
        return cls(BlockMatrix(*b), FAMILY_DELTAS[family_id], tm, family_id)

    def default_grid(self) -> tuple[float, ...]:
        return tuple(t for t in DEFAULT_THETA_GRIDS[self.family_id]
                     if t <= self.theta_max + 1e-12)


def family_point(f: SbmFamily, theta: float) -> BlockMatrix:
    """Evaluate the family at theta. Raises if theta or any entry leaves range."""
    if not (0.0 <= theta <= f.theta_max + 1e-12):
        raise ValueError(f"theta={theta} outside [0, {f.theta_max}]")
    vals = [p + theta * d for p, d in zip(f.base.as_tuple(), f.delta)]
    for v in vals:
        if not (-1e-12 <= v <= 1.0 + 1e-12):
            raise ValueError(f"family point leaves [0,1] at theta={theta}: {vals}")
    vals = [min(1.0, max(0.0, v)) for v in vals]
    return BlockMatrix(*vals)


def edge_probability_matrix(params: SbmParams) -> np.ndarray:
    """N x N block-constant probability matrix with zero diagonal."""
    n = params.n
    a, b, c = params.block.as_tuple()
    p = np.empty((2 * n, 2 * n))
    p[:n, :n] = a
    p[n:, n:] = c
    p[:n, n:] = b
    p[n:, :n] = b
    np.fill_diagonal(p, 0.0)
    return p


def validate_prob_matrix(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("probability matrix must be square")
    if not np.allclose(p, p.T, atol=1e-12):
        raise ValueError("probability matrix must be symmetric")
    if np.any(np.diagonal(p) != 0.0):
        raise ValueError("probability matrix must have zero diagonal")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probabilities must lie in [0,1]")
    return p


def sample_er(p: np.ndarray, rng: np.random.Generator,
              labels: Optional[Sequence[int]] = None) -> Graph:
    """Sample each unordered pair independently with probability p[i,j].

    One uniform variate is drawn per upper-triangle entry, so the sample is
    a pure function of (p, rng state).
    """
    p = validate_prob_matrix(p)
    n = p.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    hits = rng.random(iu.shape[0]) < p[iu, ju]
    edges = list(zip(iu[hits].tolist(), ju[hits].tolist()))
    return Graph(n, edges, labels)


@dataclass(frozen=True)
class ConnectedSample:
    graph: Graph
    rejects: int


def sample_connected(p: np.ndarray, rng: np.random.Generator,
                     max_tries: int = 1000,
                     labels: Optional[Sequence[int]] = None) -> ConnectedSample:
    """First connected sample, plus how many draws were thrown away.

    Rejection is surfaced, never silent: after max_tries disconnected draws
    the ConnectivityExhausted error carries the count.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    for tries in range(max_tries):
        g = sample_er(p, rng, labels)
        if g.is_connected():
            return ConnectedSample(g, tries)
    raise ConnectivityExhausted(max_tries)


def sample_sbm(params: SbmParams, rng: np.random.Generator,
               connected: bool = True, max_tries: int = 1000):
    """Convenience: probability matrix from params, block labels attached."""
    p = edge_probability_matrix(params)
    if connected:
        return sample_connected(p, rng, max_tries, labels=params.membership)
    return ConnectedSample(sample_er(p, rng, labels=params.membership), 0)


def expected_edges_paper(params: SbmParams) -> float:
    """C(n,2)*(a+b+c): the design-time convention that holds a+b+c fixed.

    Undercounts inter-block pairs (there are n^2 of them, not C(n,2)); kept
    verbatim because the equal-density families are built against it.
    """
    a, b, c = params.block.as_tuple()
    return math.comb(params.n, 2) * (a + b + c)


def expected_edges_exact(p: np.ndarray) -> float:
    """Sum of strictly-upper-triangular entries of the probability matrix."""
    p = np.asarray(p, dtype=float)
    return float(np.triu(p, k=1).sum())


def classify_structure(bm: BlockMatrix, margin: float = 3.0,
                       dense: float = 0.7) -> str:
    """Label a block matrix DCP / CCP / Affinity / Ambiguous.

    Cosmetic: the label rides along in output records and nothing else reads
    it. "Much greater" is a multiplicative margin. Two patterns count as
    Affinity: the classic two-community one (a and c both dominate b), and
    the core-periphery pattern when the core-side densities are only
    moderate (min(a,b) below `dense`); when they are high it is CCP. The
    dense threshold is what separates e.g. (0.8,0.8,0.05) from
    (0.5,0.5,0.05), which no ratio-only rule can tell apart.
    """
    if margin <= 1.0:
        raise ValueError("margin must exceed 1")
    a, b, c = bm.as_tuple()
    if a >= margin * b and a >= margin * c:
        return "DCP"
    core_periphery = a >= margin * c and b >= margin * c and a < margin * b
    if core_periphery and min(a, b) >= dense:
        return "CCP"
    if (a >= margin * b and c >= margin * b) or core_periphery:
        return "Affinity"
    return "Ambiguous"


def family_from_config(cfg: dict) -> tuple[SbmFamily, tuple[float, ...], int]:
    """Parse the family JSON block: {"n":12,"base":[...],"delta":[...],
    "theta":[...],"family":"M1"}. Returns (family, theta grid, n)."""
    fam_id = cfg.get("family", "M1")
    if fam_id not in FAMILY_DELTAS:
        raise ValueError(f"unknown family {fam_id!r}")
    base = tuple(cfg.get("base", DEFAULT_BASES[fam_id]))
    delta = tuple(cfg.get("delta", FAMILY_DELTAS[fam_id]))
    thetas = tuple(cfg.get("theta", DEFAULT_THETA_GRIDS[fam_id]))
    if not thetas:
        raise ValueError("theta grid is empty")
    n = int(cfg.get("n", 12))
    fam = SbmFamily(BlockMatrix(*base), delta, max(thetas), fam_id)
    return fam, thetas, n
