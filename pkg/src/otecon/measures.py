"""Core data types: discrete measures, cost matrices, samples, Gaussians.

Every type here is an immutable dataclass that validates its invariants at
construction time.  Solver modules build on these types and assume the
invariants hold, so all defensive checking lives in one place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import PRIMES, as_float_array, frozen
from .errors import DomainError, NotPSDError

MASS_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported nonnegative measure, optionally with atom locations.

    Parameters
    ----------
    weights : array of shape (n,)
        Nonnegative atom masses.
    points : array of shape (n, d), optional
        Atom locations.  May be omitted when only weights matter.
    probability : bool
        When True the weights must sum to 1 within ``MASS_TOL``.
    """

    weights: np.ndarray
    points: np.ndarray | None = None
    probability: bool = False

    def __post_init__(self) -> None:
        w = as_float_array(self.weights, "weights", ndim=1)
        if w.size == 0:
            raise DomainError("a measure needs at least one atom")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if self.probability and abs(w.sum() - 1.0) > MASS_TOL:
            raise DomainError(
                f"probability weights must sum to 1, got {w.sum()!r}"
            )
        object.__setattr__(self, "weights", frozen(w))
        if self.points is not None:
            p = as_float_array(self.points, "points")
            if p.ndim == 1:
                p = p[:, None]
            if p.ndim != 2 or p.shape[0] != w.size:
                raise DomainError(
                    f"points must have shape ({w.size}, d), got {p.shape}"
                )
            object.__setattr__(self, "points", frozen(p))

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def dim(self) -> int:
        if self.points is None:
            raise DomainError("measure carries no atom locations")
        return self.points.shape[1]


@dataclass(frozen=True)
class CostMatrix:
    """Dense M x N matrix of pairwise costs; every entry must be finite."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        c = as_float_array(self.entries, "cost entries", ndim=2)
        object.__setattr__(self, "entries", frozen(c))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class Sample1D:
    """Sorted scalar sample, the empirical counterpart of a 1D distribution.

    ``values`` must already be in nondecreasing order; use :meth:`from_data`
    to sort raw draws.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = as_float_array(self.values, "values", ndim=1)
        if v.size == 0:
            raise DomainError("a sample needs at least one observation")
        if np.any(np.diff(v) < 0):
            raise DomainError("values must be nondecreasing; use from_data to sort")
        object.__setattr__(self, "values", frozen(v))

    @classmethod
    def from_data(cls, data) -> "Sample1D":
        return cls(np.sort(np.asarray(data, dtype=float)))

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GaussianMeasure:
    """Gaussian distribution given by mean vector and covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        m = as_float_array(self.mean, "mean", ndim=1)
        c = as_float_array(self.cov, "cov", ndim=2)
        if c.shape != (m.size, m.size):
            raise DomainError(f"cov must be {m.size} x {m.size}, got {c.shape}")
        if np.max(np.abs(c - c.T)) > 1e-12:
            raise DomainError("cov must be symmetric within 1e-12")
        c = 0.5 * (c + c.T)
        eig = np.linalg.eigvalsh(c)
        if eig[0] < -1e-12 * max(eig[-1], 0.0):
            raise NotPSDError(f"cov has negative eigenvalue {eig[0]!r}")
        object.__setattr__(self, "mean", frozen(m))
        object.__setattr__(self, "cov", frozen(c))

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class HaltonSet:
    """First n points of the d-dimensional Halton sequence."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = as_float_array(self.points, "points", ndim=2)
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise DomainError("Halton points must lie in the open unit cube")
        object.__setattr__(self, "points", frozen(p))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def empirical_quantile(sample: Sample1D, t: float) -> float:
    """Left-continuous generalized inverse of the empirical cdf.

    Returns the smallest order statistic x_(k) whose cdf value k/n reaches t.
    The comparison runs against the float grid {k/n}, so quantile and cdf are
    exactly consistent in floating point: cdf(quantile(t)) >= t always holds.
    """
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise DomainError(f"quantile level must be in (0, 1], got {t!r}")
    n = sample.n
    grid = np.arange(1, n + 1, dtype=float) / n
    k = int(np.searchsorted(grid, t, side="left"))
    return float(sample.values[min(k, n - 1)])


def empirical_cdf(sample: Sample1D, y: float) -> float:
    """Fraction of observations less than or equal to y."""
    return float(np.searchsorted(sample.values, float(y), side="right")) / sample.n


def _radical_inverse(i: int, base: int) -> float:
    """Van der Corput radical inverse of i in the given base."""
    inv = 0.0
    denom = 1.0
    while i > 0:
        i, digit = divmod(i, base)
        denom *= base
        inv += digit / denom
    return inv


def halton(n: int, d: int) -> HaltonSet:
    """First n Halton points in dimension d (prime bases 2, 3, 5, ...).

    Indexing starts at 1, so the first point is (1/2, 1/3, 1/5, ...).  The
    sequence is deterministic: the first n points never change as n grows.
    """
    if n < 1:
        raise DomainError(f"need n >= 1 points, got {n}")
    if not 1 <= d <= len(PRIMES):
        raise DomainError(f"dimension must be in [1, {len(PRIMES)}], got {d}")
    pts = np.empty((n, d))
    for j in range(d):
        base = PRIMES[j]
        pts[:, j] = [_radical_inverse(i, base) for i in range(1, n + 1)]
    return HaltonSet(pts)


def spd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-1e-12 * lambda_max, 0) are clamped to zero; anything
    more negative raises :class:`NotPSDError`.
    """
    a = as_float_array(a, "matrix", ndim=2)
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"matrix must be square, got {a.shape}")
    if np.max(np.abs(a - a.T)) > 1e-10 * max(1.0, np.max(np.abs(a))):
        raise DomainError("matrix must be symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    top = max(vals[-1], 0.0)
    if vals[0] < -1e-12 * top:
        raise NotPSDError(f"matrix has negative eigenvalue {vals[0]!r}")
    root = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return 0.5 * (root + root.T)
