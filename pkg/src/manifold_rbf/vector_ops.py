"""Discrete vector-field operators on stacked ambient components.

A vector field sampled at N points is stored as the concatenation
(U^1; ...; U^n) of its ambient coordinate samples. The block projection
P_otimes applies the pointwise tangential projector to every sample; H_i
estimates the projected i-th tangential derivative of the field; S_i is its
index-swapped companion appearing in the antisymmetric (Hodge) and
symmetrized (Lichnerowicz) combinations:

    Bochner       nonsym  -sum_i H_i H_i
    Hodge         nonsym  -sum_i H_i (H_i - S_i) - [G_j G_k]
    Lichnerowicz  nonsym  -sum_i H_i (H_i + S_i)

with density-weighted quadratic-form (symmetric) counterparts solved as
generalized pencils on the numerical range of P_otimes. All operators are
materialized one block at a time to keep peak memory near the size of the
final nN x nN matrix.
"""

from dataclasses import dataclass

import numpy as np

from .scalar_ops import GeneralizedPair, ambient_derivative_matrices


@dataclass
class VectorField:
    """Stacked ambient components (U^1; ...; U^n), each of length N."""

    vec: np.ndarray
    n: int

    @staticmethod
    def from_samples(samples):
        """Build from (N, n) per-point ambient vectors."""
        samples = np.asarray(samples, dtype=float)
        return VectorField(vec=samples.T.reshape(-1).copy(),
                           n=samples.shape[1])

    def components(self):
        return self.vec.reshape(self.n, -1)

    def as_samples(self):
        return self.components().T


@dataclass
class VectorOperatorSet:
    """Scalar derivative matrices plus the projection field they pair with."""

    ops: object                 # ScalarOperatorSet
    proj: object                # ProjectionField

    @property
    def N(self):
        return self.ops.N

    @property
    def n(self):
        return self.ops.n


def build_vector_ops(ops, proj):
    if proj.mats.shape[0] != ops.N:
        raise ValueError("projection field does not match the operator cloud")
    return VectorOperatorSet(ops=ops, proj=proj)


def potimes_matrix(vops):
    """Dense block projection: block (i, j) is diag of the (i, j) entries."""
    P = vops.proj.mats
    N, n = vops.N, vops.n
    out = np.zeros((n * N, n * N))
    rng = np.arange(N)
    for i in range(n):
        for j in range(n):
            out[i * N + rng, j * N + rng] = P[:, i, j]
    return out


def h_matrix(vops, i):
    """H_i: block (j, k) = diag(p_jk) G_i."""
    P = vops.proj.mats
    G = vops.ops.G[i]
    N, n = vops.N, vops.n
    out = np.empty((n * N, n * N))
    for j in range(n):
        for k in range(n):
            out[j * N:(j + 1) * N, k * N:(k + 1) * N] = \
                P[:, j, k][:, None] * G
    return out


def s_matrix(vops, i):
    """S_i: block (j, k) = diag(p_ki) G_j."""
    P = vops.proj.mats
    N, n = vops.N, vops.n
    out = np.empty((n * N, n * N))
    for j in range(n):
        Gj = vops.ops.G[j]
        for k in range(n):
            out[j * N:(j + 1) * N, k * N:(k + 1) * N] = \
                P[:, k, i][:, None] * Gj
    return out


def _subtract_gram_blocks(L, G):
    # L -= [G_j G_k] in place
    n = len(G)
    N = G[0].shape[0]
    for j in range(n):
        for k in range(n):
            L[j * N:(j + 1) * N, k * N:(k + 1) * N] -= G[j] @ G[k]


def tangent_range_basis(proj, d):
    """Orthonormal columns spanning the pointwise tangent subspace.

    Per point the top-d eigenvectors of P(x_k) give an orthonormal tangent
    frame; frames at different points have disjoint support, so the stacked
    (nN x dN) matrix has orthonormal columns.
    """
    P = proj.mats
    N, n = P.shape[0], P.shape[1]
    _w, V = np.linalg.eigh(P)
    frame = V[:, :, n - d:]
    W = np.zeros((n * N, d * N))
    rng = np.arange(N)
    for j in range(d):
        for i in range(n):
            W[i * N + rng, j * N + rng] = frame[:, i, j]
    return W


def _intrinsic_dim(vops):
    return int(round(float(np.trace(vops.proj.mats.sum(axis=0)) / vops.N)))


def _tile_density(q, n):
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("density must be strictly positive")
    return np.tile(1.0 / q, n)


def _symmetric_pair(vops, q, term_factories):
    """A = sum of coeff * (F P)^T Qtilde^{-1} (F P) over factories () -> (F, coeff)."""
    qtinv = _tile_density(q, vops.n)
    Pot = potimes_matrix(vops)
    A = np.zeros((vops.n * vops.N, vops.n * vops.N))
    for make in term_factories:
        factor, coeff = make()
        M = factor @ Pot
        del factor
        A += coeff * (M.T @ (qtinv[:, None] * M))
        del M
    A = 0.5 * (A + A.T)
    B = (Pot * qtinv[None, :]) @ Pot
    B = 0.5 * (B + B.T)
    W = tangent_range_basis(vops.proj, _intrinsic_dim(vops))
    return GeneralizedPair(A=A, B=B, range_basis=W), Pot


def bochner(kind, vops, q=None):
    """Vector (connection) Laplacian estimator."""
    if kind == "nonsymmetric":
        dim = vops.n * vops.N
        L = np.zeros((dim, dim))
        for i in range(vops.n):
            Hi = h_matrix(vops, i)
            L -= Hi @ Hi
        return L
    if kind != "symmetric":
        raise ValueError(f"unknown estimator kind {kind!r}")
    pair, _f = _symmetric_pair(
        vops, q,
        [lambda i=i: (h_matrix(vops, i), 1.0) for i in range(vops.n)])
    return pair


def hodge(kind, vops, q=None):
    """1-form Laplacian carried to vector fields."""
    G = vops.ops.G
    if kind == "nonsymmetric":
        dim = vops.n * vops.N
        L = np.zeros((dim, dim))
        for i in range(vops.n):
            Hi = h_matrix(vops, i)
            L -= Hi @ (Hi - s_matrix(vops, i))
        _subtract_gram_blocks(L, G)
        return L
    if kind != "symmetric":
        raise ValueError(f"unknown estimator kind {kind!r}")
    pair, Pot = _symmetric_pair(
        vops, q,
        [lambda i=i: (h_matrix(vops, i) - s_matrix(vops, i), 0.5)
         for i in range(vops.n)])
    # gradient-gradient coupling block, density-weighted like the rest
    N, n = vops.N, vops.n
    qinv = 1.0 / np.asarray(q, dtype=float)
    K = np.empty((n * N, n * N))
    for j in range(n):
        for k in range(n):
            K[j * N:(j + 1) * N, k * N:(k + 1) * N] = \
                G[j].T @ (qinv[:, None] * G[k])
    A = pair.A + Pot @ K @ Pot
    pair.A = 0.5 * (A + A.T)
    return pair


def lichnerowicz(kind, vops, q=None):
    """Laplacian of the symmetrized covariant gradient."""
    if kind == "nonsymmetric":
        dim = vops.n * vops.N
        L = np.zeros((dim, dim))
        for i in range(vops.n):
            Hi = h_matrix(vops, i)
            L -= Hi @ (Hi + s_matrix(vops, i))
        return L
    if kind != "symmetric":
        raise ValueError(f"unknown estimator kind {kind!r}")
    pair, _f = _symmetric_pair(
        vops, q,
        [lambda i=i: (h_matrix(vops, i) + s_matrix(vops, i), 0.5)
         for i in range(vops.n)])
    return pair


def covariant_derivative(vops, system, U, Y):
    """Project the ambient directional derivative of the interpolated field.

    Each component Y^r is interpolated; its ambient gradient is contracted
    with U at the nodes and the result projected back to the tangent spaces.
    """
    D = vops.ops.ambient
    if D is None:
        D = ambient_derivative_matrices(system)
    Uc = U.components() if isinstance(U, VectorField) else \
        VectorField.from_samples(U).components()
    Yc = Y.components() if isinstance(Y, VectorField) else \
        VectorField.from_samples(Y).components()
    n = len(D)
    W = np.zeros_like(Yc)
    for r in range(n):
        for k in range(n):
            W[r] += Uc[k] * (D[k] @ Yc[r])
    out = np.einsum("kij,jk->ik", vops.proj.mats, W)
    return VectorField(vec=out.reshape(-1).copy(), n=n)
