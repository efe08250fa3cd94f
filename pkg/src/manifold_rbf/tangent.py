"""Tangent-space estimation from raw point clouds.

Two estimators for the per-point tangential projection matrix: the classical
first-order local SVD of neighbor differences, and a second-order scheme that
subtracts a fitted quadratic (Hessian) term from the differences before the
SVD, removing the curvature bias.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

_SCHEMA = "projection-v1"


@dataclass
class ProjectionField:
    """Per-point n x n tangential projectors.

    source records how the field was produced; degenerate flags points whose
    neighborhood did not span d directions (the projector is still the
    leading-d SVD output, never silently replaced); fallback flags points
    where the second-order fit was rank-deficient and the first-order result
    was kept.
    """

    mats: np.ndarray          # (N, n, n)
    source: str               # analytic | first_order | second_order
    K_used: int
    degenerate: np.ndarray = field(default=None)
    fallback: np.ndarray = field(default=None)

    def __post_init__(self):
        N = self.mats.shape[0]
        if self.degenerate is None:
            self.degenerate = np.zeros(N, dtype=bool)
        if self.fallback is None:
            self.fallback = np.zeros(N, dtype=bool)

    @property
    def N(self):
        return self.mats.shape[0]

    @property
    def n(self):
        return self.mats.shape[1]

    def save(self, path):
        n = self.n
        flat = self.mats.reshape(self.N, n * n)
        rows = np.column_stack([np.arange(self.N), flat])
        header = (f"schema={_SCHEMA} n={n} source={self.source} "
                  f"K_used={self.K_used}\n"
                  "index then row-major projector entries")
        fmt = ["%d"] + ["%.17g"] * (n * n)
        np.savetxt(path, rows, fmt=fmt, header=header)

    @staticmethod
    def load(path):
        meta = {}
        with open(path) as fh:
            first = fh.readline()
        for tok in first.lstrip("# ").split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
        if meta.get("schema") != _SCHEMA:
            raise ValueError(f"not a {_SCHEMA} table: {path}")
        n = int(meta["n"])
        data = np.loadtxt(path, ndmin=2)
        order = np.argsort(data[:, 0])
        mats = data[order, 1:].reshape(-1, n, n)
        return ProjectionField(mats=mats, source=meta.get("source", "?"),
                               K_used=int(meta.get("K_used", 0)))


def default_neighbor_count(d):
    # comfortable margin over the d(d+1)/2 quadratic coefficients
    return max(40, 3 * d * (d + 1))


def knn_indices(points, K, query_idx=None):
    """Exact brute-force K nearest neighbors, excluding the query point.

    Returns (Q, K) indices into `points`. query_idx selects a subset of rows
    to query (neighbors still searched in the full set).
    """
    points = np.asarray(points)
    N = points.shape[0]
    if K >= N:
        raise ValueError(f"K={K} must be smaller than the cloud size N={N}")
    if query_idx is None:
        query_idx = np.arange(N)
    sq = np.sum(points * points, axis=1)
    out = np.empty((len(query_idx), K), dtype=np.intp)
    chunk = max(1, int(2e7) // max(N, 1))
    for lo in range(0, len(query_idx), chunk):
        idx = query_idx[lo:lo + chunk]
        d2 = sq[idx][:, None] - 2.0 * points[idx] @ points.T + sq[None, :]
        d2[np.arange(len(idx)), idx] = np.inf
        part = np.argpartition(d2, K - 1, axis=1)[:, :K]
        # order neighbors by distance for deterministic downstream math
        rows = np.arange(len(idx))[:, None]
        order = np.argsort(d2[rows, part], axis=1, kind="stable")
        out[lo:lo + chunk] = part[rows, order]
    return out


def _difference_blocks(points, neighbors, query_idx):
    # D[k] has columns (y_i - x), shape (Q, n, K)
    base = points[query_idx]
    return (points[neighbors] - base[:, None, :]).transpose(0, 2, 1)


def first_order_svd(cloud, K, d=None, query_idx=None):
    """First-order local-SVD projection estimate P~ at every point.

    Per point: the n x K matrix of neighbor differences is decomposed and
    the leading d left singular vectors span the tangent estimate.
    """
    points = np.asarray(cloud.points, dtype=float)
    if d is None:
        d = cloud.spec.d
    if K < d + 1:
        raise ValueError("K must be at least d+1")
    neighbors = knn_indices(points, K, query_idx)
    full_idx = np.arange(points.shape[0]) if query_idx is None else query_idx
    D = _difference_blocks(points, neighbors, full_idx)
    U, s, _ = np.linalg.svd(D, full_matrices=False)
    T = U[:, :, :d]
    P = T @ T.transpose(0, 2, 1)
    degenerate = s[:, d - 1] <= K * np.finfo(float).eps * s[:, 0]
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} neighborhoods span fewer than d={d} "
            "directions; their projectors are flagged degenerate",
            RuntimeWarning)
    return ProjectionField(mats=P, source="first_order", K_used=K,
                           degenerate=degenerate)


def second_order_svd(cloud, K, d=None, query_idx=None):
    """Curvature-corrected projection estimate P^.

    Steps per point: first-order tangent basis; neighbor differences
    projected onto it (rho); least-squares fit of the quadratic form A y = D
    with A holding squares and doubled cross-products of rho; SVD of the
    corrected differences 2D - (A Y)^T.
    """
    points = np.asarray(cloud.points, dtype=float)
    if d is None:
        d = cloud.spec.d
    quad = d * (d + 1) // 2
    if K <= quad:
        raise ValueError(f"K must exceed d(d+1)/2 = {quad}")
    neighbors = knn_indices(points, K, query_idx)
    full_idx = np.arange(points.shape[0]) if query_idx is None else query_idx
    D = _difference_blocks(points, neighbors, full_idx)

    U1, s1, _ = np.linalg.svd(D, full_matrices=False)
    T = U1[:, :, :d]
    degenerate = s1[:, d - 1] <= K * np.finfo(float).eps * s1[:, 0]
    rho = np.einsum("qnk,qnd->qkd", D, T)

    cols = [rho[:, :, i] * rho[:, :, i] for i in range(d)]
    cols += [2.0 * rho[:, :, i] * rho[:, :, j]
             for i in range(d) for j in range(i + 1, d)]
    A = np.stack(cols, axis=2)                       # (Q, K, quad)

    Ua, sa, Vta = np.linalg.svd(A, full_matrices=False)
    bad = sa[:, -1] <= K * np.finfo(float).eps * sa[:, 0]
    sinv = np.where(sa > 0, 1.0 / np.where(sa > 0, sa, 1.0), 0.0)
    # Y = 2 pinv(A) D^T, fitted curvature term
    UtD = np.einsum("qkp,qnk->qpn", Ua, D)
    Y = 2.0 * np.einsum("qpi,qp,qpn->qin", Vta, sinv, UtD)
    corrected = 2.0 * D - np.einsum("qkp,qpn->qnk", A, Y)

    U2, _s2, _ = np.linalg.svd(corrected, full_matrices=False)
    T2 = U2[:, :, :d]
    P = T2 @ T2.transpose(0, 2, 1)
    if np.any(bad):
        warnings.warn(
            f"quadratic fit rank-deficient at {int(bad.sum())} points; "
            "first-order projectors kept there", RuntimeWarning)
        P1 = T @ T.transpose(0, 2, 1)
        P[bad] = P1[bad]
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} neighborhoods span fewer than d={d} "
            "directions; their projectors are flagged degenerate",
            RuntimeWarning)
    return ProjectionField(mats=P, source="second_order", K_used=K,
                           degenerate=degenerate, fallback=bad)


def projection_diagnostics(est, truth):
    """Frobenius error of est vs truth per point plus max and mean."""
    if est.mats.shape != truth.mats.shape:
        raise ValueError("projection fields have mismatched shapes")
    per_point = np.linalg.norm(est.mats - truth.mats, axis=(1, 2))
    return {"max_frob": float(per_point.max()),
            "mean_frob": float(per_point.mean()),
            "per_point": per_point}
