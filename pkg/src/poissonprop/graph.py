"""Similarity graph over prototype/pixel vertices.

Edge weights use a self-tuning Gaussian kernel: the squared distance to
each point's K-th nearest neighbor sets that point's local bandwidth,
so the weight matrix is invariant to global rescaling of the points.
The kNN search is exact (O(n^2) distance table) to keep results
deterministic at desk scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._parallel import run_blocked
from .errors import DimensionMismatch, KTooLarge

DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class VertexSet:
    """Vertices for propagation: support block, then auxiliary, then query.

    The first ``n_s`` vertices carry class labels in {0..k-1}; class
    k-1 is foreground by convention. A class with no labeled vertex is
    reported as a warning (the degenerate single-class case must still
    flow through and yield an all-zero propagation).
    """

    points: np.ndarray = field(repr=False)
    n_s: int
    n_a: int
    n_q: int
    labels: np.ndarray = field(repr=False)
    k: int = 2

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError("points must be an (n, C) array")
        labels = np.asarray(self.labels, dtype=np.int64)
        if self.n_s < 0 or self.n_a < 0 or self.n_q < 0:
            raise ValueError("block counts must be nonnegative")
        if pts.shape[0] != self.n_s + self.n_a + self.n_q:
            raise ValueError(
                f"point count {pts.shape[0]} != n_s+n_a+n_q = "
                f"{self.n_s + self.n_a + self.n_q}"
            )
        if labels.shape != (self.n_s,):
            raise ValueError(f"expected {self.n_s} labels, got {labels.shape}")
        if self.k < 1:
            raise ValueError("class count must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")
        missing = set(range(self.k)) - set(labels.tolist())
        if missing:
            warnings.warn(
                f"classes {sorted(missing)} have no labeled vertex; "
                "propagation from a single-class source is identically zero",
                stacklevel=2,
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def one_hot_labels(self) -> np.ndarray:
        """(n_s, k) one-hot rows for the labeled block."""
        out = np.zeros((self.n_s, self.k), dtype=np.float64)
        out[np.arange(self.n_s), self.labels] = 1.0
        return out


@dataclass
class WeightedGraph:
    """Symmetric nonnegative sparse weights with zero diagonal."""

    n: int
    weights: sp.csr_matrix
    degrees: np.ndarray = field(repr=False)

    @classmethod
    def from_weights(cls, weights: sp.spmatrix) -> "WeightedGraph":
        w = sp.csr_matrix(weights)
        w.sum_duplicates()
        n = w.shape[0]
        if w.shape != (n, n):
            raise ValueError("weight matrix must be square")
        if (w != w.T).nnz != 0:
            raise ValueError("weight matrix must be symmetric")
        if np.any(w.diagonal() != 0.0):
            raise ValueError("weight matrix must have a zero diagonal")
        if w.nnz and w.data.min() < 0.0:
            raise ValueError("weights must be nonnegative")
        degrees = np.asarray(w.sum(axis=1)).ravel()
        if np.any(degrees <= 0.0):
            raise ValueError("every vertex must have positive degree")
        return cls(n=n, weights=w, degrees=degrees)


def _pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    """Exact squared-distance table via elementwise broadcasting.

    Computed in fixed-size row blocks with per-pair channel sums, so the
    result is bit-identical for any worker-thread count (no BLAS-style
    blocked reductions involved).
    """
    n = points.shape[0]
    out = np.empty((n, n), dtype=np.float64)

    def fill(lo: int, hi: int) -> None:
        diff = points[lo:hi, None, :] - points[None, :, :]
        np.sum(diff * diff, axis=2, out=out[lo:hi])

    run_blocked(fill, n)
    return out


def knn_distances(points, k_neighbors: int) -> np.ndarray:
    """Distance from each point to its K-th nearest other point.

    Ties are broken by vertex index; results are floored at 1e-12 to
    guard division by zero on duplicate points.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be an (n, C) array")
    n = pts.shape[0]
    if k_neighbors < 1:
        raise ValueError("K must be positive")
    if k_neighbors > n - 1:
        raise KTooLarge(f"K={k_neighbors} but only {n - 1} other points exist")
    d2 = _pairwise_sq_dists(pts)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    kth = order[:, k_neighbors - 1]
    dists = np.sqrt(d2[np.arange(n), kth])
    return np.maximum(dists, DISTANCE_FLOOR)


def build_weight_graph(
    points,
    k_neighbors: int,
    symmetrization: str = "mean",
) -> WeightedGraph:
    """Sparse self-tuning kNN weight graph.

    Raw weights exp(-4 d(i,j)^2 / d_K(i)^2) are computed for the K
    nearest neighbors of each vertex, then symmetrized: "mean" averages
    the two directed entries (absent entries count as 0), "max" keeps
    the larger one.
    """
    if symmetrization not in ("mean", "max"):
        raise ValueError(f"unknown symmetrization {symmetrization!r}")
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be an (n, C) array")
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    if k_neighbors < 1:
        raise ValueError("K must be positive")
    if k_neighbors > n - 1:
        raise KTooLarge(f"K={k_neighbors} but only {n - 1} other points exist")

    d2 = _pairwise_sq_dists(pts)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    neighbors = order[:, :k_neighbors]
    dk = np.sqrt(d2[np.arange(n), neighbors[:, -1]])
    dk2 = np.maximum(dk, DISTANCE_FLOOR) ** 2

    rows = np.repeat(np.arange(n), k_neighbors)
    cols = neighbors.ravel()
    vals = np.exp(-4.0 * d2[rows, cols] / dk2[rows])
    raw = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if symmetrization == "mean":
        sym = (raw + raw.T) * 0.5
    else:
        sym = raw.maximum(raw.T)
    return WeightedGraph.from_weights(sym)


def laplacian_apply(graph: WeightedGraph, x: np.ndarray) -> np.ndarray:
    """(D - W) @ x without materializing the Laplacian densely."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != graph.n:
        raise DimensionMismatch(
            f"expected ({graph.n}, k) input, got {x.shape}"
        )
    return graph.degrees[:, None] * x - graph.weights @ x


def component_count(graph: WeightedGraph) -> int:
    count, _ = connected_components(graph.weights, directed=False)
    return int(count)


def to_triplets(graph: WeightedGraph) -> np.ndarray:
    """Upper-triangle edge list as an (n_edges, 3) array of (i, j, w).

    Rows are sorted by (i, j); symmetry makes the lower triangle
    redundant. Indices are exact as float64 at any realistic n.
    """
    coo = sp.triu(graph.weights, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    out = np.empty((coo.nnz, 3), dtype=np.float64)
    out[:, 0] = coo.row[order]
    out[:, 1] = coo.col[order]
    out[:, 2] = coo.data[order]
    return out


def from_triplets(triplets, n: int | None = None) -> WeightedGraph:
    """Rebuild a graph from an (n_edges, 3) upper-triangle edge list."""
    arr = np.asarray(triplets, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"triplets must be (n_edges, 3), got {arr.shape}")
    rows = arr[:, 0]
    cols = arr[:, 1]
    vals = arr[:, 2]
    if np.any(rows != np.rint(rows)) or np.any(cols != np.rint(cols)):
        raise ValueError("edge indices must be integral")
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)
    if np.any(rows < 0) or np.any(cols < 0):
        raise ValueError("edge indices must be nonnegative")
    if np.any(rows == cols):
        raise ValueError("self edges are not allowed")
    if n is None:
        n = int(max(rows.max(), cols.max())) + 1
    half = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return WeightedGraph.from_weights(half + half.T)
