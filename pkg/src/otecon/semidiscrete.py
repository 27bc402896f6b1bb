"""Semidiscrete transport from the uniform cube and transport-based ranks.

A quadratic-cost transport from the continuous uniform measure on [0,1]^d
onto finitely many weighted sites is described by a Laguerre diagram: site j
collects all x with ||x - y_j||^2 - psi_j minimal.  The site weights psi
solve a concave maximization whose gradient is the mismatch between target
masses and current cell masses; the continuum is discretized by a midpoint
grid.  Composing the resulting assignment with a Halton point set gives
multivariate quantiles; matching a sample against Halton points through the
exact discrete solver gives multivariate ranks, whose law is
distribution-free for samples with ties-free cost structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import as_float_array, frozen
from .errors import DomainError, NonAssignmentError, ResourceError
from .measures import CostMatrix, DiscreteMeasure, HaltonSet, halton
from .discrete import extract_assignment, solve_discrete_ot

GRID_LIMIT = 10_000_000

DEFAULT_GRID_RES = {1: 512, 2: 256, 3: 64}


@dataclass(frozen=True)
class LaguerreDiagram:
    """Sites, additive weights, and target masses of a Laguerre partition.

    Weights are gauge-normalized so the last one is zero.  ``converged``
    and ``objectives`` are solver diagnostics and do not affect the
    partition itself.
    """

    sites: np.ndarray
    weights: np.ndarray
    target_masses: np.ndarray
    converged: bool = True
    iterations: int = 0
    objectives: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        s = as_float_array(self.sites, "sites", ndim=2)
        w = as_float_array(self.weights, "weights", ndim=1)
        q = as_float_array(self.target_masses, "target_masses", ndim=1)
        if not (s.shape[0] == w.size == q.size):
            raise DomainError("sites, weights and target_masses must align")
        if abs(w[-1]) > 1e-12:
            raise DomainError("weights must be normalized with the last one zero")
        if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-10:
            raise DomainError("target masses must be a probability vector")
        object.__setattr__(self, "sites", frozen(s))
        object.__setattr__(self, "weights", frozen(w))
        object.__setattr__(self, "target_masses", frozen(q))

    @property
    def n_sites(self) -> int:
        return self.sites.shape[0]

    @property
    def dim(self) -> int:
        return self.sites.shape[1]


@dataclass(frozen=True)
class RankAssignment:
    """Permutation matching each observation to one Halton reference point."""

    permutation: np.ndarray
    reference: HaltonSet

    def __post_init__(self) -> None:
        perm = np.asarray(self.permutation, dtype=int)
        if perm.ndim != 1 or perm.size != self.reference.n:
            raise DomainError("permutation length must match the reference set")
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise DomainError("permutation must be a bijection on 0..n-1")
        perm = perm.copy()
        perm.flags.writeable = False
        object.__setattr__(self, "permutation", perm)

    @property
    def ranks(self) -> np.ndarray:
        """Reference point assigned to each observation, row per observation."""
        return self.reference.points[self.permutation]


def laguerre_assign(x: np.ndarray, diagram: LaguerreDiagram) -> np.ndarray:
    """Index of the Laguerre cell containing each query point.

    Cell j wins where ||x - y_j||^2 - psi_j is smallest; exact ties go to
    the lowest site index.
    """
    x = as_float_array(x, "x")
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != diagram.dim:
        raise DomainError(f"points must have dimension {diagram.dim}")
    d2 = np.sum((x[:, None, :] - diagram.sites[None, :, :]) ** 2, axis=2)
    scores = d2 - diagram.weights[None, :]
    idx = np.argmin(scores, axis=1)
    return int(idx[0]) if single else idx


def _midpoint_grid(d: int, res: int) -> np.ndarray:
    if res**d > GRID_LIMIT:
        raise ResourceError(
            f"grid of {res}^{d} points exceeds the {GRID_LIMIT:,} limit"
        )
    axis = (np.arange(res) + 0.5) / res
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _sq_dists(grid: np.ndarray, sites: np.ndarray) -> np.ndarray:
    return np.sum((grid[:, None, :] - sites[None, :, :]) ** 2, axis=2)


def _cell_masses(d2: np.ndarray, psi: np.ndarray) -> np.ndarray:
    idx = np.argmin(d2 - psi[None, :], axis=1)
    return np.bincount(idx, minlength=d2.shape[1]) / d2.shape[0]


def _semidual(d2: np.ndarray, psi: np.ndarray, q: np.ndarray) -> float:
    best = np.min(d2 - psi[None, :], axis=1)
    return float(best.mean() + psi @ q)


def semidiscrete_solve(
    nu: DiscreteMeasure,
    d: int,
    grid_res: int | None = None,
    tol: float = 1e-3,
    max_iter: int = 2000,
) -> LaguerreDiagram:
    """Fit Laguerre weights transporting uniform [0,1]^d mass onto nu.

    Maximizes the concave semidual objective by gradient ascent on the site
    weights, with the continuum replaced by a midpoint grid of grid_res
    cells per axis (defaults 512, 256, 64 for d = 1, 2, 3).  Steps use
    backtracking halving from 1.0 until the objective does not decrease;
    accepted objectives are nondecreasing.  Converged means the largest
    mismatch between grid cell masses and target masses fell below tol.
    """
    if nu.points is None:
        raise DomainError("nu must carry site locations")
    if nu.dim != d:
        raise DomainError(f"nu has dimension {nu.dim}, expected {d}")
    if d not in DEFAULT_GRID_RES:
        raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
    q = nu.weights / nu.total_mass
    if np.any(q <= 0):
        raise DomainError("site masses must be strictly positive")
    if grid_res is None:
        grid_res = DEFAULT_GRID_RES[d]
    if grid_res < 2:
        raise DomainError(f"grid resolution must be at least 2, got {grid_res}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    sites = nu.points
    grid = _midpoint_grid(d, grid_res)
    d2 = _sq_dists(grid, sites)
    psi = np.zeros(sites.shape[0])
    objectives: list[float] = []
    converged = False
    it = 0
    current = _semidual(d2, psi, q)
    objectives.append(current)
    for it in range(1, max_iter + 1):
        grad = q - _cell_masses(d2, psi)
        if float(np.max(np.abs(grad))) < tol:
            converged = True
            break
        step = 1.0
        accepted = False
        while step > 1e-14:
            trial = psi + step * grad
            value = _semidual(d2, trial, q)
            if value >= current - 1e-14 * max(1.0, abs(current)):
                psi = trial
                current = value
                objectives.append(current)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    if not converged:
        converged = float(np.max(np.abs(q - _cell_masses(d2, psi)))) < tol
    psi = psi - psi[-1]
    return LaguerreDiagram(
        sites=sites,
        weights=psi,
        target_masses=q,
        converged=converged,
        iterations=it,
        objectives=tuple(objectives),
    )


def vector_quantile(diagram: LaguerreDiagram, u: np.ndarray) -> np.ndarray:
    """Site attained by the quantile map at a point of the unit cube."""
    u = as_float_array(u, "u", ndim=1)
    if u.size != diagram.dim:
        raise DomainError(f"u must have dimension {diagram.dim}")
    if np.any(u < 0) or np.any(u > 1):
        raise DomainError("u must lie in the unit cube")
    return np.array(diagram.sites[laguerre_assign(u, diagram)])


def vector_rank(sample: np.ndarray) -> RankAssignment:
    """Multivariate ranks: match observations to Halton points optimally.

    Solves the quadratic assignment between the n observations and the
    first n Halton points in dimension d, both weighted uniformly.  If the
    optimal plan splits mass (a cost tie), costs are perturbed by
    1e-12 * (i * n + j) and the problem is re-solved, which breaks the tie
    deterministically.
    """
    y = as_float_array(sample, "sample")
    if y.ndim == 1:
        y = y[:, None]
    n, d = y.shape
    ref = halton(n, d)
    cost = np.sum((y[:, None, :] - ref.points[None, :, :]) ** 2, axis=2)
    uniform = DiscreteMeasure(np.full(n, 1.0 / n))
    plan, _, _ = solve_discrete_ot(uniform, uniform, CostMatrix(cost))
    try:
        sigma = extract_assignment(plan)
    except NonAssignmentError:
        bump = 1e-12 * (
            np.arange(n)[:, None] * n + np.arange(n)[None, :]
        )
        plan, _, _ = solve_discrete_ot(uniform, uniform, CostMatrix(cost + bump))
        sigma = extract_assignment(plan)
    return RankAssignment(sigma, ref)
