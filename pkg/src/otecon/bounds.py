"""Partial identification bounds built on transport arguments.

Treatment effects are never observed jointly, so functionals of the joint
distribution of potential outcomes are only set-identified.  This module
computes sharp bounds of several kinds: rearrangement (Frechet-Hoeffding)
bounds for supermodular or submodular functionals, quantile bounds for
subgroup average effects, a lower bound on the fraction of winners within
a rank subgroup, exact transport values for binary (indicator) costs with
a certifying dual witness set, and distributionally robust expectation
bounds over a Wasserstein ball on a finite support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._util import as_float_array, frozen
from .errors import DomainError, ResourceError
from .measures import CostMatrix, DiscreteMeasure, Sample1D, empirical_cdf
from .discrete import solve_discrete_ot


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lower, upper]."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise DomainError("interval endpoints must be finite")
        if self.lower > self.upper + 1e-12:
            raise DomainError(
                f"lower endpoint {self.lower!r} exceeds upper {self.upper!r}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, x: float) -> bool:
        return self.lower - 1e-12 <= x <= self.upper + 1e-12


@dataclass(frozen=True)
class BinaryRelation:
    """Zero-one matrix marking which source-target pairs are 'related'."""

    gamma: np.ndarray

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma)
        if g.ndim != 2:
            raise DomainError(f"gamma must be a matrix, got shape {g.shape}")
        vals = np.unique(g)
        if not np.all(np.isin(vals, (0, 1))):
            raise DomainError("gamma entries must be 0 or 1")
        object.__setattr__(self, "gamma", frozen(g.astype(float)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.gamma.shape


def rearrangement_bounds(
    h: Callable[[float, float], float],
    y0: Sample1D,
    y1: Sample1D,
    modularity: str,
) -> Interval:
    """Sharp bounds on E[h(Y0, Y1)] over all couplings of two samples.

    The comonotone coupling pairs equal ranks, the antitone coupling pairs
    opposite ranks; for a submodular h these give the minimum and maximum,
    for a supermodular h the reverse.  Requires equal sample sizes.
    """
    if modularity not in ("submodular", "supermodular"):
        raise DomainError(
            f"modularity must be 'submodular' or 'supermodular', got {modularity!r}"
        )
    if y0.n != y1.n:
        raise DomainError(f"sample sizes differ: {y0.n} vs {y1.n}")
    v0, v1 = y0.values, y1.values
    comonotone = float(np.mean([h(a, b) for a, b in zip(v0, v1)]))
    antitone = float(np.mean([h(a, b) for a, b in zip(v0, v1[::-1])]))
    if modularity == "submodular":
        return Interval(comonotone, antitone)
    return Interval(antitone, comonotone)


def _integrate_quantile(sample: Sample1D, lo: float, hi: float) -> float:
    """Exact integral of the empirical quantile function over (lo, hi].

    The quantile is the step function equal to the k-th order statistic on
    ((k-1)/n, k/n], so the integral is a finite sum of step values times
    overlap lengths.
    """
    if hi <= lo:
        return 0.0
    n = sample.n
    total = 0.0
    k_lo = int(np.floor(lo * n))
    k_hi = int(np.ceil(hi * n))
    for k in range(k_lo, min(k_hi, n)):
        seg_lo = max(lo, k / n)
        seg_hi = min(hi, (k + 1) / n)
        if seg_hi > seg_lo:
            total += sample.values[k] * (seg_hi - seg_lo)
    return total


def kaji_subgroup_bounds(a: float, b: float, y0: Sample1D, y1: Sample1D) -> Interval:
    """Sharp bounds on the mean effect within the rank subgroup (a, b).

    For units whose rank under the control outcome lies in (a, b), the
    subgroup average treatment effect is bounded below by coupling the
    subgroup with the lowest b - a quantiles of the treated outcome and
    above by coupling it with the highest ones:

        lower = mean over u in (a,b) of Q1(u - a) - Q0(u)
        upper = mean over u in (a,b) of Q1(1 - u + a) - Q0(u)

    Both integrals are evaluated exactly on the quantile step grids.
    At (a, b) = (0, 1) both endpoints collapse to the difference in means.
    """
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"need 0 <= a < b <= 1, got a={a!r}, b={b!r}")
    width = b - a
    base = _integrate_quantile(y0, a, b)
    lower = (_integrate_quantile(y1, 0.0, width) - base) / width
    upper = (_integrate_quantile(y1, 1.0 - width, 1.0) - base) / width
    return Interval(lower, upper)


def winners_lower_bound(a: float, b: float, y0: Sample1D, y1: Sample1D) -> float:
    """Sharp lower bound on the fraction of winners in the rank subgroup.

    Bounds from below the probability that a unit with control rank in
    (a, b) gains from treatment (Y1 > Y0).  The bound is

        max(0, sup over abar in (a, b] of (abar - a - F1(Q0(abar)))) / (b - a)

    and the supremum over the piecewise-linear objective is attained on the
    rank grid of y0 or at b, so only those candidates are evaluated.
    """
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"need 0 <= a < b <= 1, got a={a!r}, b={b!r}")
    n0 = y0.n
    ranks = np.arange(1, n0 + 1, dtype=float) / n0
    candidates = [r for r in ranks if a < r <= b]
    candidates.append(b)
    if a > 0.0:
        candidates.append(a)
    best = 0.0
    for abar in candidates:
        k = int(np.searchsorted(ranks, abar, side="left"))
        qv = float(y0.values[min(k, n0 - 1)])
        best = max(best, abar - a - empirical_cdf(y1, qv))
    return best / (b - a)


def binary_cost_ot(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    rel: BinaryRelation,
    witness: bool | None = None,
) -> tuple[float, frozenset | None]:
    """Minimal coupled mass on a relation, with a certifying witness set.

    Computes min over couplings of the mass placed on pairs with
    gamma = 1.  By strong duality this equals
    max over subsets A of rows of mu(A) - nu(A^Gamma), where A^Gamma
    collects every column reachable from A outside the relation.  The
    witness is the first maximizing A in subset enumeration order; it is
    computed for up to 20 rows (enumeration is exponential) and skipped
    above that unless explicitly requested, in which case a resource error
    is raised.
    """
    g = rel.gamma
    m_rows, n_cols = g.shape
    if mu.size != m_rows or nu.size != n_cols:
        raise DomainError(
            f"relation shape {g.shape} does not match measures ({mu.size}, {nu.size})"
        )
    _, _, value = solve_discrete_ot(mu, nu, CostMatrix(g))
    if witness is None:
        witness = m_rows <= 20
    if not witness:
        return value, None
    if m_rows > 20:
        raise ResourceError(f"witness enumeration needs <= 20 rows, got {m_rows}")
    # Column bitmask of the complement relation per row: j is in A^Gamma as
    # soon as some row in A relates to it with gamma = 0.
    comp_masks = []
    for i in range(m_rows):
        mask = 0
        for j in range(n_cols):
            if g[i, j] == 0.0:
                mask |= 1 << j
        comp_masks.append(mask)
    nu_w = nu.weights
    best_val = -np.inf
    best_set: frozenset | None = None
    for subset in range(1 << m_rows):
        mu_mass = 0.0
        reach = 0
        s = subset
        i = 0
        while s:
            if s & 1:
                mu_mass += mu.weights[i]
                reach |= comp_masks[i]
            s >>= 1
            i += 1
        nu_mass = 0.0
        r = reach
        j = 0
        while r:
            if r & 1:
                nu_mass += nu_w[j]
            r >>= 1
            j += 1
        dual = mu_mass - nu_mass
        if dual > best_val + 1e-15:
            best_val = dual
            best_set = frozenset(
                i for i in range(m_rows) if subset & (1 << i)
            )
    return value, best_set


def dro_expectation_bound(
    f: np.ndarray,
    delta: CostMatrix,
    mu: DiscreteMeasure,
    rho: float,
) -> float:
    """Worst-case expectation of f over a transport ball around mu.

    Upper-bounds E_nu[f] over all nu on the same finite support whose
    transport discrepancy from mu (ground cost delta) is at most rho, via
    the univariate dual

        inf over lam >= 0 of  lam rho + sum_i mu_i max_j (f_j - lam delta_ji).

    The inner maxima are exact finite maxima; the outer convex problem is
    bracketed on [0, lam_max] (beyond lam_max every inner max stays at its
    own support point, so the dual grows linearly) and refined by golden
    section search to 1e-9 in lam.
    """
    f = as_float_array(f, "f", ndim=1)
    d = delta.entries
    n = f.size
    if d.shape != (n, n):
        raise DomainError(f"delta must be {n} x {n}, got {d.shape}")
    if mu.size != n:
        raise DomainError(f"mu must have {n} atoms, got {mu.size}")
    if np.any(np.abs(np.diag(d)) > 0):
        raise DomainError("delta must vanish on the diagonal")
    if np.any(d < 0):
        raise DomainError("delta must be nonnegative")
    if rho < 0:
        raise DomainError(f"radius rho must be nonnegative, got {rho!r}")
    w = mu.weights / mu.total_mass

    def dual(lam: float) -> float:
        # delta[j, i]: discrepancy of moving reference mass at i to point j.
        inner = np.max(f[:, None] - lam * d, axis=0)
        return lam * rho + float(w @ inner)

    off = d[~np.eye(n, dtype=bool)]
    positive = off[off > 0]
    if positive.size == 0:
        return dual(0.0)
    lam_max = (float(f.max()) - float(f.min())) / float(positive.min())
    if lam_max <= 0:
        return dual(0.0)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, lam_max
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = dual(x1), dual(x2)
    while hi - lo > 1e-9:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = dual(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = dual(x2)
    return min(dual(0.0), dual(lam_max), f1, f2, dual(0.5 * (lo + hi)))
