"""Two-sided matching with transferable utility and its inverse problems.

In the Choo-Siow logit market, equilibrium matched flows and singles obey

    flows[x, y]  = exp(Phi[x, y]) * u[x] * v[y]
    singles_x[x] = u[x]^2,   singles_y[y] = v[y]^2

together with the population adding-up constraints; u, v solve a coupled
fixed point with closed-form positive roots.  The surplus matrix Phi is
nonparametrically identified from one observed table, linearly
parameterized surplus is estimated by moment matching, and the same
estimator maximizes a weighted Poisson pseudo-likelihood.  sista performs
proximal-gradient estimation of surplus coefficients under an l1 penalty,
alternating exact Sinkhorn marginal updates with a soft-thresholded
gradient step on the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import EXP_CAP, as_float_array, frozen, logsumexp
from .errors import (
    DomainError,
    ExpOverflowError,
    NonIdentificationError,
    StepSizeError,
)
from .measures import CostMatrix


@dataclass(frozen=True)
class MatchingTable:
    """Observed or predicted match counts plus singles on each side.

    All entries must be strictly positive: zeros would put log-odds at
    infinity and destroy identification.  ``converged`` and ``iterations``
    are diagnostics attached by the equilibrium solver.
    """

    flows: np.ndarray
    singles_x: np.ndarray
    singles_y: np.ndarray
    converged: bool = True
    iterations: int = 0

    def __post_init__(self) -> None:
        fl = as_float_array(self.flows, "flows", ndim=2)
        sx = as_float_array(self.singles_x, "singles_x", ndim=1)
        sy = as_float_array(self.singles_y, "singles_y", ndim=1)
        if fl.shape != (sx.size, sy.size):
            raise DomainError(
                f"flows must be {sx.size} x {sy.size}, got {fl.shape}"
            )
        if np.any(fl <= 0) or np.any(sx <= 0) or np.any(sy <= 0):
            raise DomainError("all flows and singles must be strictly positive")
        object.__setattr__(self, "flows", frozen(fl))
        object.__setattr__(self, "singles_x", frozen(sx))
        object.__setattr__(self, "singles_y", frozen(sy))

    @property
    def mu(self) -> np.ndarray:
        """Total mass of each x type: matched plus single."""
        return self.flows.sum(axis=1) + self.singles_x

    @property
    def nu(self) -> np.ndarray:
        """Total mass of each y type: matched plus single."""
        return self.flows.sum(axis=0) + self.singles_y


@dataclass(frozen=True)
class SurplusBasis:
    """Linear surplus specification Phi(beta) = sum_k beta_k basis[:, :, k]."""

    basis: np.ndarray
    params: np.ndarray | None = None

    def __post_init__(self) -> None:
        b = as_float_array(self.basis, "basis", ndim=3)
        object.__setattr__(self, "basis", frozen(b))
        if self.params is not None:
            p = as_float_array(self.params, "params", ndim=1)
            if p.size != b.shape[2]:
                raise DomainError(
                    f"params must have length {b.shape[2]}, got {p.size}"
                )
            object.__setattr__(self, "params", frozen(p))

    @property
    def n_params(self) -> int:
        return self.basis.shape[2]

    def surplus(self, beta: np.ndarray) -> np.ndarray:
        beta = as_float_array(beta, "beta", ndim=1)
        if beta.size != self.n_params:
            raise DomainError(f"beta must have length {self.n_params}")
        return self.basis @ beta


def _guard_exp(z: np.ndarray, what: str) -> np.ndarray:
    if np.max(z) > EXP_CAP:
        raise ExpOverflowError(f"{what} exceeds the exp overflow guard ({EXP_CAP})")
    return np.exp(z)


def cs_equilibrium(
    phi: CostMatrix,
    mu: np.ndarray,
    nu: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 10000,
) -> MatchingTable:
    """Solve the logit matching equilibrium for given surplus and populations.

    Iterates the closed-form positive-root updates

        u_x = (-s_x + sqrt(s_x^2 + 4 mu_x)) / 2,  s_x = sum_y K_xy v_y
        v_y = (-t_y + sqrt(t_y^2 + 4 nu_y)) / 2,  t_y = sum_x K_xy u_x

    with K = exp(Phi), until the population constraints

        mu_x = u_x^2 + u_x s_x,   nu_y = v_y^2 + v_y t_y

    hold within tol.  Non-convergence inside max_iter is reported through
    the table's ``converged`` flag rather than an exception.
    """
    mu = as_float_array(mu, "mu", ndim=1)
    nu = as_float_array(nu, "nu", ndim=1)
    if np.any(mu <= 0) or np.any(nu <= 0):
        raise DomainError("populations must be strictly positive")
    p = phi.entries
    if p.shape != (mu.size, nu.size):
        raise DomainError(
            f"surplus shape {p.shape} does not match populations"
            f" ({mu.size}, {nu.size})"
        )
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    k = _guard_exp(p, "surplus")
    v = np.sqrt(nu)
    u = np.sqrt(mu)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        s = k @ v
        u = 0.5 * (-s + np.sqrt(s * s + 4.0 * mu))
        t = k.T @ u
        v = 0.5 * (-t + np.sqrt(t * t + 4.0 * nu))
        flows = k * np.outer(u, v)
        res = max(
            float(np.max(np.abs(flows.sum(axis=1) + u * u - mu))),
            float(np.max(np.abs(flows.sum(axis=0) + v * v - nu))),
        )
        if res < tol:
            converged = True
            break
    return MatchingTable(
        flows=k * np.outer(u, v),
        singles_x=u * u,
        singles_y=v * v,
        converged=converged,
        iterations=it,
    )


def cs_identify(table: MatchingTable) -> CostMatrix:
    """Recover the surplus matrix from one observed matching table.

    Phi[x, y] = log flows[x, y] - log(singles_x[x]) / 2 - log(singles_y[y]) / 2.
    Composing with :func:`cs_equilibrium` at the table's own populations
    reproduces the table.
    """
    phi = (
        np.log(table.flows)
        - 0.5 * np.log(table.singles_x)[:, None]
        - 0.5 * np.log(table.singles_y)[None, :]
    )
    return CostMatrix(phi)


def _observed_moments(table: MatchingTable, basis: SurplusBasis) -> np.ndarray:
    return np.einsum("xy,xyk->k", table.flows, basis.basis)


def _mm_objective(
    table_fit: MatchingTable,
    mu: np.ndarray,
    nu: np.ndarray,
    observed_phi_sum: float,
) -> float:
    """Convex outer objective of moment matching at an inner equilibrium.

    The inner fees (a, b) minimize the market's dual welfare, whose value at
    the equilibrium is a sum of fee revenues and cell intensities; the outer
    objective subtracts the observed surplus total, so its lambda-gradient
    is exactly predicted minus observed moments.
    """
    a = -np.log(table_fit.singles_x) / 2.0
    b = -np.log(table_fit.singles_y) / 2.0
    value = (
        float(mu @ a)
        + float(nu @ b)
        + float(table_fit.flows.sum())
        + 0.5 * float(table_fit.singles_x.sum())
        + 0.5 * float(table_fit.singles_y.sum())
    )
    return value - observed_phi_sum


def moment_matching(
    table: MatchingTable,
    basis: SurplusBasis,
    tol: float = 1e-9,
    max_iter: int = 1000,
    log: bool = False,
):
    """Fit surplus coefficients so predicted basis moments match observed ones.

    Minimizes the convex outer objective of the linearly parameterized
    matching model by gradient descent on the coefficients; the gradient is
    exactly (predicted moments - observed moments), each prediction coming
    from an inner equilibrium solve at the current surplus.  Backtracking
    halving guards every step; near the optimum, steps that leave the
    objective unchanged at float resolution are still accepted because the
    residual keeps shrinking.  Returns (lam, a, b): the fitted coefficients
    and the log-inverse single shares of each side; with ``log=True`` a
    fourth element carries the accepted objective history.  A stalled
    search with a nonzero moment residual means no coefficient vector can
    fit the data and raises :class:`NonIdentificationError`.
    """
    mu = table.mu
    nu = table.nu
    if basis.basis.shape[:2] != table.flows.shape:
        raise DomainError(
            f"basis shape {basis.basis.shape[:2]} does not match table"
            f" {table.flows.shape}"
        )
    observed = _observed_moments(table, basis)
    lam = np.zeros(basis.n_params)
    inner_tol = min(1e-12, tol * 1e-3)

    def fit_at(point: np.ndarray):
        eq = cs_equilibrium(CostMatrix(basis.surplus(point)), mu, nu, tol=inner_tol)
        value = _mm_objective(eq, mu, nu, float(observed @ point))
        predicted = _observed_moments(eq, basis)
        return eq, value, predicted

    eq, value, predicted = fit_at(lam)
    history = [value]

    def finish():
        a = -np.log(eq.singles_x) / 2.0
        b = -np.log(eq.singles_y) / 2.0
        if log:
            return lam, a, b, {"objectives": tuple(history)}
        return lam, a, b

    for _ in range(max_iter):
        grad = predicted - observed
        g2 = float(grad @ grad)
        if float(np.max(np.abs(grad))) < tol:
            return finish()
        step = 1.0
        improved = False
        while step > 1e-14:
            trial = lam - step * grad
            try:
                trial_eq, trial_value, trial_pred = fit_at(trial)
            except ExpOverflowError:
                step *= 0.5
                continue
            # Sufficient decrease, or no measurable change once the descent
            # quantum falls below float resolution of the objective.
            armijo = trial_value <= value - 1e-4 * step * g2
            saturated = (
                1e-4 * step * g2 <= 1e-15 * max(1.0, abs(value))
                and trial_value <= value + 1e-15 * max(1.0, abs(value))
            )
            if armijo or saturated:
                eq, lam, value, predicted = trial_eq, trial, trial_value, trial_pred
                history.append(value)
                improved = True
                break
            step *= 0.5
        if not improved:
            raise NonIdentificationError(
                "moment residual cannot be reduced; basis does not span the data"
            )
    raise NonIdentificationError(
        f"moment residual above {tol!r} after {max_iter} gradient steps"
    )


def poisson_loglik(
    theta: tuple[np.ndarray, np.ndarray, np.ndarray],
    table: MatchingTable,
    basis: SurplusBasis,
) -> float:
    """Weighted Poisson pseudo-log-likelihood of a parameterized market.

    theta = (lam, a, b) with surplus Phi = basis @ lam and fees a, b.  The
    likelihood treats matched cells and singles as Poisson counts with
    intensities exp(Phi - a - b), exp(-2a), exp(-2b):

        sum_xy flows_xy (Phi - a - b) - sum_xy exp(Phi - a - b)
        - sum_x singles_x a_x - (1/2) sum_x exp(-2 a_x)
        - sum_y singles_y b_y - (1/2) sum_y exp(-2 b_y)

    Its maximizer over theta coincides with the moment-matching estimator.
    Exponents beyond the overflow guard raise loudly rather than returning inf.
    """
    lam, a, b = theta
    a = as_float_array(a, "a", ndim=1)
    b = as_float_array(b, "b", ndim=1)
    phi = basis.surplus(lam)
    if phi.shape != table.flows.shape:
        raise DomainError("basis shape does not match the table")
    if a.size != phi.shape[0] or b.size != phi.shape[1]:
        raise DomainError("fee vectors must match the table dimensions")
    z = phi - a[:, None] - b[None, :]
    ez = _guard_exp(z, "match intensity exponent")
    ea = _guard_exp(-2.0 * a, "single intensity exponent")
    eb = _guard_exp(-2.0 * b, "single intensity exponent")
    return float(
        np.sum(table.flows * z)
        - np.sum(ez)
        - float(table.singles_x @ a)
        - 0.5 * float(ea.sum())
        - float(table.singles_y @ b)
        - 0.5 * float(eb.sum())
    )


def sista(
    pi_hat: np.ndarray,
    mu: np.ndarray,
    nu: np.ndarray,
    basis: SurplusBasis,
    eps: float,
    l1: float = 0.0,
    step: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 20000,
    log: bool = False,
):
    """l1-penalized surplus estimation by Sinkhorn plus soft thresholding.

    The entropic matching model with cost c(beta) = -Phi(beta) assigns

        pi[x, y] = exp((phi_x + psi_y - c_xy) / eps),

    and the smooth part of the loss is the negated dual

        -F = -sum_xy pi_hat (phi + psi - c) + eps sum_xy exp((phi + psi - c)/eps).

    Each iteration performs the two exact Sinkhorn marginal updates in the
    log domain (block minimization of -F in phi, then psi) and one proximal
    gradient step on beta: the gradient of -F in beta is the gap between
    model and observed basis moments, and the prox of the l1 penalty is
    soft thresholding.  The default step is 1 / max_k sum_xy basis_k^2.
    Backtracking halves the step while the composite objective
    -F + l1 * |beta|_1 would increase; two consecutive exhausted searches
    signal divergence and raise :class:`StepSizeError`.  Iteration stops
    when the coefficient update is smaller than tol.  With ``log=True``
    returns (beta, info) where info carries the composite objective history
    and the final potentials and plan.
    """
    pi_hat = as_float_array(pi_hat, "pi_hat", ndim=2)
    mu = as_float_array(mu, "mu", ndim=1)
    nu = as_float_array(nu, "nu", ndim=1)
    if np.any(pi_hat <= 0):
        raise DomainError("pi_hat must be strictly positive")
    if np.any(mu <= 0) or np.any(nu <= 0):
        raise DomainError("marginals must be strictly positive")
    if pi_hat.shape != (mu.size, nu.size):
        raise DomainError(
            f"pi_hat shape {pi_hat.shape} does not match marginals"
            f" ({mu.size}, {nu.size})"
        )
    if basis.basis.shape[:2] != pi_hat.shape:
        raise DomainError("basis shape does not match pi_hat")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if l1 < 0:
        raise DomainError(f"l1 penalty must be nonnegative, got {l1!r}")
    if step is None:
        lipschitz = float(np.max(np.einsum("xyk,xyk->k", basis.basis, basis.basis)))
        step = 1.0 / lipschitz if lipschitz > 0 else 1.0
    if step <= 0:
        raise DomainError(f"step must be positive, got {step!r}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")

    beta = (
        np.array(basis.params, dtype=float)
        if basis.params is not None
        else np.zeros(basis.n_params)
    )
    phi = np.zeros(mu.size)
    psi = np.zeros(nu.size)
    log_mu = np.log(mu)
    log_nu = np.log(nu)

    def neg_f(phi_, psi_, cost_) -> float:
        z = (phi_[:, None] + psi_[None, :] - cost_) / eps
        ez = _guard_exp(z, "plan exponent")
        lin = float(np.sum(pi_hat * (phi_[:, None] + psi_[None, :] - cost_)))
        return -lin + eps * float(ez.sum())

    def composite(phi_, psi_, beta_, cost_) -> float:
        return neg_f(phi_, psi_, cost_) + l1 * float(np.sum(np.abs(beta_)))

    fails = 0
    objectives: list[float] = []
    plan = np.zeros_like(pi_hat)
    for _ in range(max_iter):
        cost = -basis.surplus(beta)
        phi = eps * (log_mu - logsumexp((psi[None, :] - cost) / eps, axis=1))
        psi = eps * (log_nu - logsumexp((phi[:, None] - cost) / eps, axis=0))
        plan = _guard_exp((phi[:, None] + psi[None, :] - cost) / eps, "plan exponent")
        grad = np.einsum("xy,xyk->k", plan - pi_hat, basis.basis)
        current = composite(phi, psi, beta, cost)
        objectives.append(current)
        trial_step = step
        new_beta = beta
        accepted = False
        while trial_step > step * 2.0**-40:
            cand = beta - trial_step * grad
            cand = np.sign(cand) * np.maximum(np.abs(cand) - l1 * trial_step, 0.0)
            cost_cand = -basis.surplus(cand)
            if composite(phi, psi, cand, cost_cand) <= current + 1e-12 * max(
                1.0, abs(current)
            ):
                new_beta = cand
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            fails += 1
            if fails >= 2:
                raise StepSizeError(
                    "backtracking exhausted twice in a row; step size diverged"
                )
            continue
        fails = 0
        delta = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        if delta < tol:
            break
    if log:
        info = {
            "objectives": tuple(objectives),
            "phi": phi,
            "psi": psi,
            "plan": plan,
        }
        return beta, info
    return beta
