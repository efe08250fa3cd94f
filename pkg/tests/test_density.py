"""Silverman bandwidth and ambient Gaussian KDE."""

import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from manifold_rbf.density import kde_density, silverman_bandwidth
from manifold_rbf.zoo import PointCloud, Torus, sample_manifold, sampling_density


def cloud_from(points):
    return PointCloud(points=np.asarray(points, dtype=float), intrinsic=None,
                      spec=None)


def test_silverman_closed_form():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((1000, 2))
    cloud = cloud_from(x)
    sigma = float(np.mean(np.std(x, axis=0, ddof=1)))
    want = sigma * (4.0 / (4 * 1000)) ** (1.0 / 6.0)
    assert silverman_bandwidth(cloud) == pytest.approx(want, rel=1e-14)


def test_silverman_scales_with_cloud():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((200, 3))
    h = silverman_bandwidth(cloud_from(x))
    assert silverman_bandwidth(cloud_from(2.5 * x)) == pytest.approx(
        2.5 * h, rel=1e-12)


def test_silverman_decreases_with_N():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((300, 2))
    h1 = silverman_bandwidth(cloud_from(x))
    h2 = silverman_bandwidth(cloud_from(np.repeat(x, 2, axis=0)))
    assert h2 < h1


def test_silverman_rejects_degenerate():
    with pytest.raises(ValueError):
        silverman_bandwidth(cloud_from([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        silverman_bandwidth(cloud_from(np.ones((50, 2))))


def test_kde_identical_points_uniform():
    pts = np.tile([0.3, -1.2, 0.5], (40, 1))
    est = kde_density(cloud_from(pts), h=0.7)
    norm = 1.0 / ((0.7 * math.sqrt(2 * math.pi)) ** 3)
    assert np.allclose(est.q, norm, rtol=1e-14)
    assert est.method == "kde_silverman"


def test_kde_two_separated_clusters_balanced():
    rng = np.random.default_rng(3)
    a = 0.1 * rng.standard_normal((120, 2))
    b = 0.1 * rng.standard_normal((120, 2)) + np.array([50.0, 0.0])
    est = kde_density(cloud_from(np.vstack([a, b])))
    qa, qb = est.q[:120].mean(), est.q[120:].mean()
    assert abs(qa - qb) / qa <= 0.05


def test_kde_positive():
    rng = np.random.default_rng(4)
    est = kde_density(cloud_from(rng.uniform(-3, 3, size=(200, 3))))
    assert est.q.min() > 0


def test_kde_permutation_equivariant():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((150, 3))
    q = kde_density(cloud_from(x), h=0.4).q
    perm = rng.permutation(150)
    q_perm = kde_density(cloud_from(x[perm]), h=0.4).q
    assert np.allclose(q_perm, q[perm], rtol=1e-10)


def test_kde_rigid_motion_invariant():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((150, 3))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    moved = x @ Q.T + np.array([5.0, -2.0, 0.5])
    q0 = kde_density(cloud_from(x), h=0.5).q
    q1 = kde_density(cloud_from(moved), h=0.5).q
    assert np.allclose(q1, q0, rtol=1e-9)


def test_kde_rejects_bad_bandwidth():
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError):
        kde_density(cloud_from(rng.standard_normal((30, 2))), h=0.0)


def test_kde_default_bandwidth_is_silverman():
    rng = np.random.default_rng(8)
    cloud = cloud_from(rng.standard_normal((80, 2)))
    est = kde_density(cloud)
    assert est.bandwidth == pytest.approx(silverman_bandwidth(cloud))
    explicit = kde_density(cloud, h=est.bandwidth)
    assert np.array_equal(est.q, explicit.q)


def test_kde_tracks_torus_density():
    # ambient KDE ranks points like the intrinsic-uniform sampling density
    spec = Torus(2.0)
    cloud = sample_manifold(spec, 2500, seed=0)
    est = kde_density(cloud)
    rho = spearmanr(est.q, sampling_density(spec, cloud)).statistic
    assert rho >= 0.8
