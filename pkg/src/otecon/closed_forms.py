"""Closed-form transport values: one dimension, Gaussians, sliced distances.

On the real line the comonotone coupling is optimal for any submodular cost,
so transport values reduce to exact sums over the merged quantile grid of
the two samples.  Between Gaussians the quadratic problem has an explicit
affine optimal map.  Sliced distances reduce multivariate samples to
averages of one-dimensional values over random projection directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._util import as_float_array, frozen
from .errors import DomainError, NotInvertibleError
from .measures import GaussianMeasure, Sample1D, spd_sqrt


@dataclass(frozen=True)
class AffineMap:
    """Map x -> linear @ x + shift with symmetric PSD linear part."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self) -> None:
        a = as_float_array(self.linear, "linear", ndim=2)
        b = as_float_array(self.shift, "shift", ndim=1)
        if a.shape != (b.size, b.size):
            raise DomainError(f"linear must be {b.size} x {b.size}, got {a.shape}")
        if np.max(np.abs(a - a.T)) > 1e-10 * max(1.0, np.max(np.abs(a))):
            raise DomainError("linear part must be symmetric")
        eig = np.linalg.eigvalsh(0.5 * (a + a.T))
        if eig[0] < -1e-10 * max(eig[-1], 1.0):
            raise DomainError("linear part must be positive semidefinite")
        object.__setattr__(self, "linear", frozen(a))
        object.__setattr__(self, "shift", frozen(b))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.shift


def _merged_segments(x: Sample1D, y: Sample1D):
    """Yield (length, xi, yj) over the merged quantile breakpoint grid.

    Both empirical quantile functions are constant on each yielded segment,
    so integrals of h(Q_x(t), Q_y(t)) over (0, 1) are exact sums.
    """
    m, n = x.n, y.n
    xv, yv = x.values, y.values
    i = j = 0
    t = 0.0
    while i < m and j < n:
        nxt = min((i + 1) / m, (j + 1) / n)
        yield nxt - t, xv[i], yv[j]
        if (i + 1) / m <= nxt:
            i += 1
        if (j + 1) / n <= nxt:
            j += 1
        t = nxt


def ot_value_1d(
    x: Sample1D,
    y: Sample1D,
    cost: Callable[[float, float], float],
    submodular: bool = True,
) -> float:
    """Exact transport value between two scalar samples for a submodular cost.

    Computes the integral of cost(Q_x(t), Q_y(t)) over t in (0, 1) on the
    merged breakpoint grid, which is the optimal value whenever the cost is
    submodular.  The caller asserts submodularity via the flag; it cannot be
    verified pointwise here.
    """
    if not submodular:
        raise DomainError("the quantile formula requires a submodular cost")
    total = 0.0
    for length, xi, yj in _merged_segments(x, y):
        total += length * float(cost(xi, yj))
    return total


def wasserstein_1d(x: Sample1D, y: Sample1D, p: float = 2.0) -> float:
    """Order-p Wasserstein distance between scalar samples, exactly.

    Equals the p-th root of the merged-grid integral of |Q_x - Q_y|^p.
    """
    if p < 1:
        raise DomainError(f"order p must be at least 1, got {p!r}")
    total = 0.0
    for length, xi, yj in _merged_segments(x, y):
        total += length * abs(xi - yj) ** p
    return total ** (1.0 / p)


def gaussian_ot_map(g1: GaussianMeasure, g2: GaussianMeasure) -> AffineMap:
    """Optimal quadratic-cost transport map between two Gaussians.

    The map is x -> A x + b with
    A = S^{-1/2} (S^{1/2} cov2 S^{1/2})^{1/2} S^{-1/2} for S = cov1 and
    b = mean2 - A mean1.  Requires cov1 to be strictly positive definite.
    """
    if g1.dim != g2.dim:
        raise DomainError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    vals, vecs = np.linalg.eigh(g1.cov)
    if vals[0] <= 1e-12 * max(vals[-1], 1.0):
        raise NotInvertibleError("cov1 is singular; no transport map exists")
    half = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    inv_half = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    middle = spd_sqrt(half @ g2.cov @ half)
    a = inv_half @ middle @ inv_half
    a = 0.5 * (a + a.T)
    b = g2.mean - a @ g1.mean
    return AffineMap(a, b)


def gaussian_w2(g1: GaussianMeasure, g2: GaussianMeasure) -> float:
    """Quadratic Wasserstein distance between Gaussians, in closed form.

    W2^2 = |m1 - m2|^2 + tr(cov1 + cov2 - 2 (cov1^{1/2} cov2 cov1^{1/2})^{1/2});
    the trace term is clamped at zero against rounding.  Only positive
    semidefiniteness is required here.
    """
    if g1.dim != g2.dim:
        raise DomainError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    half = spd_sqrt(g1.cov)
    cross = spd_sqrt(half @ g2.cov @ half)
    gap = float(np.trace(g1.cov) + np.trace(g2.cov) - 2.0 * np.trace(cross))
    sq = float(np.sum((g1.mean - g2.mean) ** 2)) + max(gap, 0.0)
    return float(np.sqrt(max(sq, 0.0)))


def sliced_wasserstein(
    x: np.ndarray,
    y: np.ndarray,
    p: float = 2.0,
    n_dir: int = 100,
    seed: int = 0,
) -> float:
    """Sliced Wasserstein distance between two point clouds.

    Averages the p-th power of the one-dimensional distance between the
    projections of x and y over n_dir random directions (normalized Gaussian
    draws from a counter-based Philox generator under the given seed), then
    takes the p-th root.  In dimension 1 this reduces exactly to the
    one-dimensional distance.
    """
    if p < 1:
        raise DomainError(f"order p must be at least 1, got {p!r}")
    if n_dir < 1:
        raise DomainError(f"need at least one direction, got {n_dir}")
    x = as_float_array(x, "x")
    y = as_float_array(y, "y")
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[1] != y.shape[1]:
        raise DomainError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    d = x.shape[1]
    if d == 0:
        raise DomainError("points must have at least one coordinate")
    rng = np.random.Generator(np.random.Philox(seed))
    dirs = rng.standard_normal((n_dir, d))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms < 1e-12] = 1.0
    dirs /= norms[:, None]
    proj_x = np.sort(x @ dirs.T, axis=0)
    proj_y = np.sort(y @ dirs.T, axis=0)
    total = 0.0
    for k in range(n_dir):
        w = wasserstein_1d(Sample1D(proj_x[:, k]), Sample1D(proj_y[:, k]), p)
        total += w**p
    return (total / n_dir) ** (1.0 / p)


def barycenter_1d(samples: list[Sample1D], lam: np.ndarray) -> Sample1D:
    """Quadratic-cost barycenter of equally sized scalar samples.

    With equal sample sizes the barycenter is again an n-point sample whose
    i-th order statistic is the lam-weighted average of the i-th order
    statistics of the inputs.
    """
    if not samples:
        raise DomainError("need at least one sample")
    lam = as_float_array(lam, "lam", ndim=1)
    if lam.size != len(samples):
        raise DomainError(f"need {len(samples)} weights, got {lam.size}")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-10:
        raise DomainError("weights must be nonnegative and sum to 1")
    n = samples[0].n
    if any(s.n != n for s in samples):
        raise DomainError("all samples must have the same size")
    stacked = np.stack([s.values for s in samples], axis=0)
    return Sample1D(lam @ stacked)
