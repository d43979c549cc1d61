"""Spectral embeddings and density-adjusted dot-product resampling.

Both embeddings factorize a symmetric target matrix through its singular
value decomposition: the adjacency matrix directly, or the degree-normalized
Laplacian D^{-1/2} A D^{-1/2}. Positions are X = U_d sqrt(S_d). SVD rather
than an eigendecomposition because adjacency matrices are generally not
positive semidefinite; on PSD inputs the two coincide. Latent positions are
only defined up to orthogonal maps, so a fixed column-sign convention
(largest-magnitude entry positive) pins the output down for reproducibility;
dot products, the only quantity consumed downstream, are unaffected.

Resampling treats clip(X X^T, 0, 1) as an edge probability matrix, rescales
it so its expected edge count matches the source graph's actual count, and
draws connected samples from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .graph import Graph
from .sbm import ConnectedSample, expected_edges_exact, sample_connected

__all__ = [
    "AdjacencySpectralEmbedding", "LaplacianSpectralEmbedding", "Embedding",
    "ResampleModel", "ResampleDraw", "ase", "lse", "select_dimension",
    "rdpg_probabilities", "density_adjust", "resample", "write_embedding_csv",
]

# Variance floor for the profile likelihood; degenerate constant segments
# would otherwise divide by zero.
_ZG_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class Embedding:
    positions: np.ndarray  # one row per node
    kind: str              # "ASE" or "LSE"
    dim: int
    singular_values: np.ndarray  # full spectrum of the target matrix

    def __post_init__(self):
        if self.dim < 1 or self.positions.shape[1] != self.dim:
            raise ValueError("dim must match the position matrix")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")


def select_dimension(values, d_max: Optional[int] = None) -> int:
    """Elbow pick via profile likelihood over two-Gaussian splits.

    For each split point q, the first q values and the rest are modeled as
    Gaussians with separate means and a pooled (floored) variance; the q
    with maximal log-likelihood wins, ties going to the smaller q. d_max
    truncates the spectrum before scanning.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise ValueError("need at least two singular values")
    if np.any(v < -1e-12):
        raise ValueError("singular values must be nonnegative")
    if np.any(np.diff(v) > 1e-9):
        raise ValueError("singular values must be nonincreasing")
    if d_max is not None:
        v = v[:max(2, int(d_max))]
    m = v.size
    best_q = 1
    best_ll = -np.inf
    for q in range(1, m):
        head, tail = v[:q], v[q:]
        mu1 = head.mean()
        mu2 = tail.mean()
        ss = float(((head - mu1) ** 2).sum() + ((tail - mu2) ** 2).sum())
        var = max(ss / m, _ZG_VAR_FLOOR)
        ll = -0.5 * m * np.log(2.0 * np.pi * var) - ss / (2.0 * var)
        if ll > best_ll:
            best_ll = ll
            best_q = q
    return best_q


def _sign_fix(u: np.ndarray) -> np.ndarray:
    # per column: entry with the largest magnitude made positive
    out = u.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def _as_target_matrix(x) -> np.ndarray:
    if isinstance(x, Graph):
        return x.adjacency()
    m = np.asarray(x, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("target must be a square matrix or a Graph")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValueError("target matrix must be symmetric")
    return m


class AdjacencySpectralEmbedding:
    """Truncated-SVD positions for the adjacency matrix.

    Estimator-style: constructor takes hyperparameters, fit(graph) computes
    attributes (latent_positions_, singular_values_, n_components_),
    fit_transform returns the positions. Accepts a Graph or a precomputed
    symmetric matrix.
    """

    kind = "ASE"

    def __init__(self, n_components: Optional[int] = None,
                 d_max: Optional[int] = None):
        self.n_components = n_components
        self.d_max = d_max

    # sklearn protocol, without the sklearn dependency
    def get_params(self, deep: bool = True) -> dict:
        return {"n_components": self.n_components, "d_max": self.d_max}

    def set_params(self, **params):
        for k, v in params.items():
            if k not in self.get_params():
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self

    def _target(self, x) -> np.ndarray:
        return _as_target_matrix(x)

    def fit(self, x, y=None):
        m = self._target(x)
        n = m.shape[0]
        u, s, vt = np.linalg.svd(m)
        if s[0] <= 0.0:
            raise ValueError("zero matrix has no positive singular values")
        d = self.n_components
        if d is None:
            d_max = self.d_max if self.d_max is not None else max(1, n // 2)
            d = select_dimension(s, d_max=d_max)
        if not (1 <= d <= n):
            raise ValueError(f"n_components={d} out of range 1..{n}")
        ud = _sign_fix(u[:, :d])
        self.u_ = u
        self.vt_ = vt
        self.singular_values_ = s
        self.n_components_ = int(d)
        self.latent_positions_ = ud * np.sqrt(s[:d])
        return self

    def fit_transform(self, x, y=None) -> np.ndarray:
        return self.fit(x).latent_positions_

    def embedding(self, x) -> Embedding:
        self.fit(x)
        return Embedding(self.latent_positions_, self.kind,
                         self.n_components_, self.singular_values_)


class LaplacianSpectralEmbedding(AdjacencySpectralEmbedding):
    """Same pipeline on the normalized Laplacian D^{-1/2} A D^{-1/2}."""

    kind = "LSE"

    def _target(self, x) -> np.ndarray:
        m = _as_target_matrix(x)
        deg = m.sum(axis=1)
        if np.any(deg <= 0):
            raise ValueError("isolated node: normalized Laplacian undefined")
        inv_sqrt = 1.0 / np.sqrt(deg)
        return m * inv_sqrt[:, None] * inv_sqrt[None, :]


def ase(g, d: Optional[int] = None) -> Embedding:
    return AdjacencySpectralEmbedding(n_components=d).embedding(g)


def lse(g, d: Optional[int] = None) -> Embedding:
    return LaplacianSpectralEmbedding(n_components=d).embedding(g)


def rdpg_probabilities(e: Union[Embedding, np.ndarray]) -> np.ndarray:
    """clip(X X^T, 0, 1) with the diagonal zeroed."""
    x = e.positions if isinstance(e, Embedding) else np.asarray(e, dtype=float)
    p = np.clip(x @ x.T, 0.0, 1.0)
    p = (p + p.T) / 2.0  # kill asymmetric float dust
    np.fill_diagonal(p, 0.0)
    return p


@dataclass(frozen=True)
class ResampleModel:
    adjusted_p: np.ndarray
    ratio: float
    source_kind: Optional[str]
    clipped: int          # upper-triangle entries pushed back into [0,1]
    dim: Optional[int] = None

    def manifest(self) -> dict:
        return {"kind": self.source_kind, "d": self.dim,
                "r": self.ratio, "clipped_entries": self.clipped}


def density_adjust(p: np.ndarray, target_edges: float,
                   source_kind: Optional[str] = None,
                   dim: Optional[int] = None) -> ResampleModel:
    """Scale p so its expected edge count hits target_edges, then clip.

    After clipping, the expected count can only fall short of the target;
    the number of clipped entries is recorded instead of hidden.
    """
    p = np.asarray(p, dtype=float)
    expected = expected_edges_exact(p)
    if expected <= 0.0:
        raise ValueError("probability matrix has zero expected edges")
    if target_edges <= 0:
        raise ValueError("target edge count must be positive")
    r = float(target_edges) / expected
    scaled = r * p
    iu = np.triu_indices(p.shape[0], k=1)
    clipped = int(np.count_nonzero(scaled[iu] > 1.0))
    adjusted = np.clip(scaled, 0.0, 1.0)
    np.fill_diagonal(adjusted, 0.0)
    return ResampleModel(adjusted, r, source_kind, clipped, dim)


class ResampleDraw(NamedTuple):
    graph: Graph
    rejects: int
    model: ResampleModel


def resample(g: Graph, kind: str, rng: np.random.Generator,
             max_tries: int = 1000) -> ResampleDraw:
    """Embed, density-adjust, and draw one connected sample.

    Block labels ride along (node identity is preserved by the embedding).
    Raises ConnectivityExhausted with the rejection count if no connected
    draw appears; for some dense-core parameter regimes that outcome is
    informative, not exceptional.
    """
    kind = kind.upper()
    if kind == "ASE":
        emb = ase(g)
    elif kind == "LSE":
        emb = lse(g)
    else:
        raise ValueError(f"kind must be ASE or LSE, got {kind!r}")
    p = rdpg_probabilities(emb)
    model = density_adjust(p, g.edge_count(), source_kind=kind, dim=emb.dim)
    cs: ConnectedSample = sample_connected(model.adjusted_p, rng, max_tries,
                                           labels=g.labels)
    return ResampleDraw(cs.graph, cs.rejects, model)


def write_embedding_csv(e: Embedding, path) -> None:
    """One row per node: node index then the d coordinates."""
    with open(path, "w") as fh:
        cols = ",".join(f"x{j}" for j in range(e.dim))
        fh.write(f"node,{cols}\n")
        for i, row in enumerate(e.positions):
            fh.write(str(i) + "," + ",".join(repr(float(v)) for v in row) + "\n")
