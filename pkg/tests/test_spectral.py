"""Eigensolvers, mode ordering, OLS alignment, error metrics, CSV export."""

import numpy as np
import pytest

from manifold_rbf.scalar_ops import GeneralizedPair
from manifold_rbf.spectral import (align_eigenvectors_ols, eigenvalue_errors,
                                   solve_nonsymmetric, solve_symmetric,
                                   write_alignment_csv, write_spectrum_csv)
from manifold_rbf.zoo import Sphere, sample_manifold


# -- symmetric pencil solver ---------------------------------------------------


def test_symmetric_diagonal_case():
    pair = GeneralizedPair(A=np.diag([0.0, 1.0, 4.0]), B_diag=np.ones(3))
    res = solve_symmetric(pair, k=3)
    assert np.allclose(res.values, [0.0, 1.0, 4.0], atol=1e-14)
    assert np.allclose(np.abs(res.vectors), np.eye(3), atol=1e-14)
    assert res.ordering == "by_real_ascending"


def test_symmetric_gram_psd():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((40, 40))
    pair = GeneralizedPair(A=G.T @ G, B_diag=np.ones(40))
    res = solve_symmetric(pair, k=40)
    assert res.values.min() >= -1e-10 * np.abs(res.values).max()


def test_symmetric_b_orthonormal_and_residual():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((30, 30))
    A = G.T @ G
    b = rng.uniform(0.5, 2.0, size=30)
    res = solve_symmetric(GeneralizedPair(A=A, B_diag=b), k=30)
    V = res.vectors
    assert np.abs(V.T @ (b[:, None] * V) - np.eye(30)).max() <= 1e-8
    resid = A @ V - b[:, None] * V * res.values[None, :]
    assert np.linalg.norm(resid) / np.linalg.norm(A) <= 1e-8


def test_symmetric_rejects_indefinite():
    A = np.eye(3)
    with pytest.raises(ValueError):
        solve_symmetric(GeneralizedPair(A=A, B_diag=np.array([1.0, -1.0, 1.0])),
                        k=2)
    B = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        solve_symmetric(GeneralizedPair(A=A, B=B), k=2)


def test_symmetric_k_too_large():
    with pytest.raises(ValueError):
        solve_symmetric(GeneralizedPair(A=np.eye(4), B_diag=np.ones(4)), k=5)


# -- non-symmetric solver ------------------------------------------------------


def test_nonsymmetric_rotation_matrix():
    L = np.array([[0.0, 1.0], [-1.0, 0.0]])
    res = solve_nonsymmetric(L, k=2)
    assert np.allclose(np.abs(res.values), 1.0, atol=1e-14)
    assert np.allclose(sorted(res.values.imag), [-1.0, 1.0], atol=1e-14)


def test_nonsymmetric_requires_square():
    with pytest.raises(ValueError):
        solve_nonsymmetric(np.ones((3, 2)), k=1)
    with pytest.raises(ValueError):
        solve_nonsymmetric(np.eye(3), k=4)


def test_ordering_tie_break_deterministic():
    # |lambda| = 1 four times: sorted by real part then imaginary part
    L = np.zeros((4, 4))
    L[0, 1], L[1, 0] = 1.0, -1.0          # +-i
    L[2, 2], L[3, 3] = 1.0, -1.0          # +-1
    first = solve_nonsymmetric(L, k=4)
    again = solve_nonsymmetric(L, k=4)
    want = np.array([-1.0 + 0j, 0 - 1j, 0 + 1j, 1.0 + 0j])
    assert np.allclose(first.values, want, atol=1e-14)
    assert np.array_equal(first.values, again.values)
    assert np.array_equal(first.vectors, again.vectors)


def test_nonsymmetric_residual():
    rng = np.random.default_rng(2)
    L = rng.standard_normal((50, 50))
    res = solve_nonsymmetric(L, k=20)
    resid = L @ res.vectors - res.vectors * res.values[None, :]
    assert np.linalg.norm(resid) / np.linalg.norm(L) <= 1e-6


def test_trivial_flagging():
    L = np.diag([1e-12, 1e-12, 1.0, 2.0])
    res = solve_nonsymmetric(L, k=4)
    assert list(res.trivial) == [True, True, False, False]
    assert np.allclose(res.nontrivial_values().real, [1.0, 2.0])
    assert res.rank_L == 2
    assert len(res.all_values) == 4


# -- OLS alignment -------------------------------------------------------------


def sphere_harmonic_block(N=500, m=2):
    cloud = sample_manifold(Sphere(), N, seed=0, mode="random_area")
    F = np.column_stack([cloud.points[:, 2], cloud.points[:, 0]])[:, :m]
    return F / np.linalg.norm(F, axis=0)


def test_align_identity():
    F = sphere_harmonic_block()
    rep = align_eigenvectors_ols(F, F)
    assert np.allclose(rep.beta, np.eye(2), atol=1e-12)
    assert rep.per_mode_error.max() <= 1e-12


def test_align_recovers_rotation():
    F = sphere_harmonic_block()
    ang = 0.7
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    rep = align_eigenvectors_ols(F, F @ R)
    assert rep.per_mode_error.max() <= 1e-10
    # aligned columns stay inside the span of the estimates
    proj, _, _, _ = np.linalg.lstsq(F @ R, rep.aligned, rcond=None)
    assert np.allclose((F @ R) @ proj, rep.aligned, atol=1e-10)


def test_align_noise_level_reflected():
    rng = np.random.default_rng(3)
    F = sphere_harmonic_block()
    ang = rng.uniform(0, 2 * np.pi)
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    E = rng.standard_normal(F.shape)
    E /= np.linalg.norm(E, axis=0)
    rep = align_eigenvectors_ols(F, F @ R + 0.05 * E)
    assert np.all(np.abs(rep.per_mode_error - 0.05) <= 0.02)


def test_align_total_error_rotation_invariant():
    rng = np.random.default_rng(4)
    F = sphere_harmonic_block()
    U = F + 0.1 * rng.standard_normal(F.shape)
    R, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    r0 = F - align_eigenvectors_ols(F, U).aligned
    r1 = F @ R - align_eigenvectors_ols(F @ R, U).aligned
    assert abs(np.sum(r0 ** 2) - np.sum(r1 ** 2)) <= 1e-10


def test_align_rank_deficient_warns():
    F = sphere_harmonic_block()
    U = np.column_stack([F[:, 0], F[:, 0]])
    with pytest.warns(RuntimeWarning):
        align_eigenvectors_ols(F, U)


def test_align_rejects_bad_input():
    F = sphere_harmonic_block()
    with pytest.raises(ValueError):
        align_eigenvectors_ols(F, F[:, :1])
    bad = F.copy()
    bad[:, 1] = 0.0
    with pytest.raises(ValueError):
        align_eigenvectors_ols(bad, F)


# -- eigenvalue error metric ---------------------------------------------------


def test_eigenvalue_errors_exact_match():
    assert np.allclose(
        eigenvalue_errors(np.array([0.0, 1.0, 1.0, 4.0]),
                          np.array([0.0, 1.0, 1.0, 4.0]), count=4), 0.0)


def test_eigenvalue_errors_zero_mode_clamped():
    errs = eigenvalue_errors(np.array([0.25, 2.0]), np.array([0.0, 2.0]),
                             count=2)
    assert errs[0] == pytest.approx(0.25)     # |0.25 - 0| / max(0, 1)
    assert errs[1] == pytest.approx(0.0)


def test_eigenvalue_errors_complex_magnitude():
    errs = eigenvalue_errors(np.array([1.0 + 0.1j]), np.array([1.0]), count=1)
    assert errs[0] == pytest.approx(abs(np.abs(1 + 0.1j) - 1.0))


def test_eigenvalue_errors_skips_trivial():
    L = np.diag([1e-13, 1.0, 4.0])
    res = solve_nonsymmetric(L, k=3)
    errs = eigenvalue_errors(res, np.array([1.0, 4.0]), count=2)
    assert np.allclose(errs, 0.0, atol=1e-12)


def test_eigenvalue_errors_insufficient_modes():
    with pytest.raises(ValueError):
        eigenvalue_errors(np.array([1.0]), np.array([1.0, 2.0]), count=2)


# -- CSV export ----------------------------------------------------------------


def test_spectrum_csv(tmp_path):
    L = np.diag([1e-13, 1.0, 2.0])
    res = solve_nonsymmetric(L, k=3)
    path = tmp_path / "spec.csv"
    write_spectrum_csv(path, res, config_echo={"N": 3})
    text = path.read_text()
    assert "schema=spectrum-v1" in text
    assert '"N": 3' in text
    data = np.loadtxt(path, delimiter=",")
    assert data.shape == (3, 5)
    assert list(data[:, 4]) == [1.0, 0.0, 0.0]      # trivial flags
    assert np.allclose(data[:, 3], [1e-13, 1.0, 2.0])


def test_alignment_csv(tmp_path):
    path = tmp_path / "align.csv"
    write_alignment_csv(path, [1.0, 1.0], [1.02, 0.97], [0.01, 0.02])
    text = path.read_text()
    assert "schema=alignment-v1" in text
    assert "OLS alignment" in text
    data = np.loadtxt(path, delimiter=",")
    assert data.shape == (2, 4)
    assert np.allclose(data[:, 2], [1.02, 0.97])
