"""Sampling-density estimation for the symmetric (weak-form) operators.

When the true sampling density is unknown it is estimated with a Gaussian
product KDE in the ambient coordinates, bandwidth from Silverman's rule.
The ambient-space estimate is a deliberately crude stand-in for the density
on the manifold; experiments can also run with the analytic density or a
uniform one.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class DensityEstimate:
    q: np.ndarray
    bandwidth: float
    method: str          # kde_silverman | analytic | uniform


def silverman_bandwidth(cloud):
    """h = sigma_hat * (4 / ((n+2) N))^(1/(n+4)) with ambient dimension n.

    sigma_hat is the per-coordinate sample standard deviation (ddof=1)
    averaged over the n coordinates.
    """
    x = np.asarray(cloud.points, dtype=float)
    N, n = x.shape
    if N < 2:
        raise ValueError("need at least two points")
    sigma = float(np.mean(np.std(x, axis=0, ddof=1)))
    if sigma <= 0:
        raise ValueError("zero-variance cloud, bandwidth undefined")
    return sigma * (4.0 / ((n + 2) * N)) ** (1.0 / (n + 4))


def kde_density(cloud, h=None):
    """Gaussian KDE at the sample points themselves (self-pair included)."""
    x = np.asarray(cloud.points, dtype=float)
    N, n = x.shape
    if h is None:
        h = silverman_bandwidth(cloud)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    norm = 1.0 / (N * (h * math.sqrt(2.0 * math.pi)) ** n)
    sq = np.sum(x * x, axis=1)
    q = np.empty(N)
    chunk = max(1, int(2e7) // max(N, 1))
    for lo in range(0, N, chunk):
        hi = min(N, lo + chunk)
        d2 = sq[lo:hi, None] - 2.0 * x[lo:hi] @ x.T + sq[None, :]
        np.maximum(d2, 0.0, out=d2)
        q[lo:hi] = norm * np.sum(np.exp(-d2 / (2.0 * h * h)), axis=1)
    return DensityEstimate(q=q, bandwidth=float(h), method="kde_silverman")
