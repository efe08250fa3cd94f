"""Discrete tangential derivatives and Laplace-Beltrami operators.

From an interpolation system and a tangential projection field this module
assembles the per-coordinate derivative matrices G_i (tangential gradient
components in ambient coordinates) and the two discrete Laplacians built from
them: the pointwise non-symmetric estimator -sum_i G_i G_i and the
density-weighted symmetric pencil sum_i G_i^T Q^{-1} G_i f = lambda Q^{-1} f.
Both use the positive semi-definite sign convention (-div grad).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .rbf import kernel_deriv_over_r, pinv_matrix


@dataclass
class ScalarOperatorSet:
    """The n tangential derivative matrices plus provenance references.

    ambient holds the unprojected ambient derivative matrices of the
    interpolant (one per coordinate) when keep_ambient was requested; the
    covariant-derivative path needs them.
    """

    G: list                       # n matrices, each (N, N)
    proj: object
    kernel: object
    system: object
    ambient: list = field(default=None, repr=False)

    @property
    def N(self):
        return self.G[0].shape[0]

    @property
    def n(self):
        return len(self.G)


def _kernel_jacobian_weights(system):
    # phi'(r)/r over all pairs; the diagonal takes the analytic r -> 0 limit
    points = np.asarray(system.cloud.points, dtype=float)
    r = cdist(points, points)
    return points, kernel_deriv_over_r(system.model, r)


def ambient_derivative_matrices(system):
    """Matrices D_m with (D_m f)_j = d/dX^m of the interpolant of f at x_j."""
    points, w = _kernel_jacobian_weights(system)
    inv = pinv_matrix(system)
    return [((points[:, m][:, None] - points[None, :, m]) * w) @ inv
            for m in range(points.shape[1])]


def build_grad_matrices(system, proj, keep_ambient=True):
    """Tangential gradient component matrices G_i = sum_m diag(P[:,i,m]) D_m.

    (G_i f)_j estimates the i-th ambient component of the tangential gradient
    p_i(x_j) . grad of the interpolant at node x_j. With keep_ambient=False
    the unprojected D_m are streamed and discarded to halve peak memory.
    """
    P = proj.mats
    if P.shape[0] != system.N:
        raise ValueError("projection field does not match the cloud size")
    n = P.shape[1]
    if keep_ambient:
        D = ambient_derivative_matrices(system)
        G = [sum(P[:, i, m][:, None] * D[m] for m in range(n))
             for i in range(n)]
        return ScalarOperatorSet(G=G, proj=proj, kernel=system.model,
                                 system=system, ambient=D)
    points, w = _kernel_jacobian_weights(system)
    inv = pinv_matrix(system)
    G = [np.zeros((system.N, system.N)) for _ in range(n)]
    for m in range(n):
        Dm = ((points[:, m][:, None] - points[None, :, m]) * w) @ inv
        for i in range(n):
            G[i] += P[:, i, m][:, None] * Dm
    return ScalarOperatorSet(G=G, proj=proj, kernel=system.model,
                             system=system, ambient=None)


def laplace_beltrami_nonsymmetric(ops):
    """Pointwise estimator -sum_i G_i G_i; spectrum may be complex."""
    N = ops.N
    L = np.zeros((N, N))
    for Gi in ops.G:
        L -= Gi @ Gi
    return L


@dataclass
class GeneralizedPair:
    """Symmetric pencil A v = lambda B v.

    B is diagonal (B_diag) for scalar problems and a dense positive
    semi-definite matrix for block-projected vector problems; range_basis,
    when present, holds orthonormal columns spanning the subspace on which
    the pencil is definite and should be solved.
    """

    A: np.ndarray
    B_diag: np.ndarray = None
    B: np.ndarray = None
    range_basis: np.ndarray = None


def laplace_beltrami_symmetric(ops, q):
    """Weak-form pencil: A = sum_i G_i^T Q^{-1} G_i, B = Q^{-1}, Q = diag(q).

    Uniform sampling passes constant q (the constant cancels in the
    generalized spectrum).
    """
    q = np.asarray(q, dtype=float)
    if q.shape[0] != ops.N or np.any(q <= 0):
        raise ValueError("density must be strictly positive, one value per point")
    qinv = 1.0 / q
    A = np.zeros((ops.N, ops.N))
    for Gi in ops.G:
        A += Gi.T @ (qinv[:, None] * Gi)
    A = 0.5 * (A + A.T)
    return GeneralizedPair(A=A, B_diag=qinv)


def reliable_mode_budget(N):
    """Heuristic count of trustworthy non-symmetric modes (no guarantee)."""
    return int(np.floor(np.sqrt(N)))
