"""Entropic optimal transport: Sinkhorn iterations, balanced and unbalanced.

The balanced problem regularizes the transport LP with the relative entropy
of the plan against the product measure,

    min  <C, pi> + eps * KL(pi | mu x nu)   s.t.  pi has marginals mu, nu,

and is solved by alternating dual updates.  All updates run in the log
domain with max-subtracted log-sum-exp, so small eps is safe.  The
unbalanced variant replaces the hard marginal constraints by generalized
Kullback-Leibler penalties with weights lam_mu, lam_nu; its dual updates
are the balanced ones damped by lam / (lam + eps).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import frozen, logsumexp
from .errors import DomainError
from .measures import CostMatrix, DiscreteMeasure


@dataclass(frozen=True)
class EntropicSolution:
    """Primal plan and dual potentials of an entropic transport problem.

    The plan is stored in closed form from the potentials,
    ``plan[i, j] = mu_i nu_j exp((phi_i + psi_j - C_ij) / eps)``, and the
    potentials are gauge-normalized so that ``phi[0] == 0``.
    ``marginal_errors`` keeps the per-sweep residual history for
    diagnostics; ``marginal_error`` is its final entry.
    """

    plan: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    eps: float
    iterations: int
    marginal_error: float
    converged: bool
    mu: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    marginal_errors: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        for name in ("plan", "phi", "psi", "mu", "nu"):
            object.__setattr__(self, name, frozen(getattr(self, name)))


def _check_probability(m: DiscreteMeasure, name: str) -> np.ndarray:
    w = m.weights
    if np.any(w <= 0):
        raise DomainError(f"{name} must have strictly positive weights")
    if abs(w.sum() - 1.0) > 1e-10:
        raise DomainError(f"{name} must be a probability vector")
    return w


def _check_positive(m: DiscreteMeasure, name: str) -> np.ndarray:
    w = m.weights
    if np.any(w <= 0):
        raise DomainError(f"{name} must have strictly positive weights")
    return w


def _plan_from_potentials(
    log_mu: np.ndarray,
    log_nu: np.ndarray,
    phi: np.ndarray,
    psi: np.ndarray,
    c: np.ndarray,
    eps: float,
) -> np.ndarray:
    return np.exp(
        log_mu[:, None] + log_nu[None, :] + (phi[:, None] + psi[None, :] - c) / eps
    )


def sinkhorn(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    cost: CostMatrix,
    eps: float,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> EntropicSolution:
    """Balanced entropic transport by log-domain Sinkhorn iteration.

    Each sweep sets phi to match the row marginals exactly and then psi to
    match the column marginals exactly; the reported residual is the largest
    remaining violation of either marginal constraint, which is nonincreasing
    across sweeps.  Terminates once the residual drops below tol, else after
    max_iter sweeps with ``converged=False``.
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    w_mu = _check_probability(mu, "mu")
    w_nu = _check_probability(nu, "nu")
    c = cost.entries
    if c.shape != (w_mu.size, w_nu.size):
        raise DomainError(
            f"cost shape {c.shape} does not match measures ({w_mu.size}, {w_nu.size})"
        )
    log_mu = np.log(w_mu)
    log_nu = np.log(w_nu)
    phi = np.zeros(w_mu.size)
    psi = np.zeros(w_nu.size)
    errors: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        phi = -eps * logsumexp(log_nu[None, :] + (psi[None, :] - c) / eps, axis=1)
        psi = -eps * logsumexp(log_mu[:, None] + (phi[:, None] - c) / eps, axis=0)
        plan = _plan_from_potentials(log_mu, log_nu, phi, psi, c, eps)
        err = max(
            float(np.max(np.abs(plan.sum(axis=1) - w_mu))),
            float(np.max(np.abs(plan.sum(axis=0) - w_nu))),
        )
        errors.append(err)
        if err < tol:
            converged = True
            break
    gauge = phi[0]
    phi = phi - gauge
    psi = psi + gauge
    plan = _plan_from_potentials(log_mu, log_nu, phi, psi, c, eps)
    return EntropicSolution(
        plan=plan,
        phi=phi,
        psi=psi,
        eps=eps,
        iterations=it,
        marginal_error=errors[-1],
        converged=converged,
        mu=w_mu,
        nu=w_nu,
        marginal_errors=tuple(errors),
    )


def eot_value(sol: EntropicSolution, cost: CostMatrix) -> tuple[float, float]:
    """Transport cost and full primal objective of an entropic solution.

    Returns ``(transport_cost, primal)`` where primal adds
    ``eps * KL(plan | mu x nu)`` to the transport cost.  The relative
    entropy is evaluated through the potentials, which represent the
    density of the plan against the product measure exactly.
    """
    if not sol.converged:
        raise DomainError("solution did not converge; value would be meaningless")
    c = cost.entries
    if c.shape != sol.plan.shape:
        raise DomainError(
            f"cost shape {c.shape} does not match plan shape {sol.plan.shape}"
        )
    transport = float(np.sum(sol.plan * c))
    log_density = (sol.phi[:, None] + sol.psi[None, :] - c) / sol.eps
    entropy = float(np.sum(sol.plan * log_density))
    return transport, transport + sol.eps * entropy


def unbalanced_sinkhorn(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    cost: CostMatrix,
    eps: float,
    lam_mu: float,
    lam_nu: float,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> EntropicSolution:
    """Unbalanced entropic transport with soft-marginal KL penalties.

    Solves  min <C, pi> + eps KL(pi | mu x nu)
                 + lam_mu KL(pi 1 | mu) + lam_nu KL(pi' 1 | nu)
    over all nonnegative pi, with generalized (unnormalized) KL divergences.
    The dual updates are the balanced Sinkhorn updates multiplied by
    lam / (lam + eps); convergence is measured on the fixed-point residual
    of the first-order conditions phi = -lam_mu log(pi 1 / mu) and
    psi = -lam_nu log(pi' 1 / nu).  As lam_mu, lam_nu grow the solution
    approaches the balanced one.  Unlike the balanced solver, mu and nu may
    have arbitrary positive total masses.
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if lam_mu <= 0 or lam_nu <= 0:
        raise DomainError("marginal penalties lam_mu, lam_nu must be positive")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    w_mu = _check_positive(mu, "mu")
    w_nu = _check_positive(nu, "nu")
    c = cost.entries
    if c.shape != (w_mu.size, w_nu.size):
        raise DomainError(
            f"cost shape {c.shape} does not match measures ({w_mu.size}, {w_nu.size})"
        )
    log_mu = np.log(w_mu)
    log_nu = np.log(w_nu)
    damp_mu = lam_mu / (lam_mu + eps)
    damp_nu = lam_nu / (lam_nu + eps)
    phi = np.zeros(w_mu.size)
    psi = np.zeros(w_nu.size)
    errors: list[float] = []
    converged = False
    it = 0
    residual = np.inf
    for it in range(1, max_iter + 1):
        phi = -eps * damp_mu * logsumexp(
            log_nu[None, :] + (psi[None, :] - c) / eps, axis=1
        )
        psi = -eps * damp_nu * logsumexp(
            log_mu[:, None] + (phi[:, None] - c) / eps, axis=0
        )
        plan = _plan_from_potentials(log_mu, log_nu, phi, psi, c, eps)
        row = plan.sum(axis=1)
        col = plan.sum(axis=0)
        residual = max(
            float(np.max(np.abs(phi + lam_mu * np.log(row / w_mu)))),
            float(np.max(np.abs(psi + lam_nu * np.log(col / w_nu)))),
        )
        errors.append(residual)
        if residual < tol:
            converged = True
            break
    plan = _plan_from_potentials(log_mu, log_nu, phi, psi, c, eps)
    marginal_error = max(
        float(np.max(np.abs(plan.sum(axis=1) - w_mu))),
        float(np.max(np.abs(plan.sum(axis=0) - w_nu))),
    )
    return EntropicSolution(
        plan=plan,
        phi=phi,
        psi=psi,
        eps=eps,
        iterations=it,
        marginal_error=marginal_error,
        converged=converged,
        mu=w_mu,
        nu=w_nu,
        marginal_errors=tuple(errors),
    )
