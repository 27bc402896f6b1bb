"""Command line front end: CSV inputs, solver dispatch, JSON output.

Every command writes a single JSON document with five fixed keys:
``command``, ``version``, ``config`` (the resolved options), ``result``
(the payload) and ``diagnostics`` (iterations, residuals, convergence).
Floats are serialized with 17 significant digits, so repeated runs of the
same config are byte-identical and values round-trip exactly.

Exit codes: 0 success, 2 malformed input, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    BinaryRelation,
    binary_cost_ot,
    dro_expectation_bound,
    kaji_subgroup_bounds,
    rearrangement_bounds,
    winners_lower_bound,
)
from .closed_forms import gaussian_w2, sliced_wasserstein, wasserstein_1d
from .csvio import (
    read_basis_csv,
    read_gaussian_csv,
    read_matching_csv,
    read_matrix_csv,
    read_measure_csv,
    read_points_csv,
    read_sample_csv,
    read_values_csv,
)
from .discrete import solve_discrete_ot, verify_optimality
from .entropic import eot_value, sinkhorn, unbalanced_sinkhorn
from .errors import (
    DomainError,
    ExpOverflowError,
    NonAssignmentError,
    NonIdentificationError,
    ResourceError,
    SolverStallError,
    StepSizeError,
)
from .matching import (
    SurplusBasis,
    cs_equilibrium,
    cs_identify,
    moment_matching,
    sista,
)
from .measures import CostMatrix
from .semidiscrete import semidiscrete_solve, vector_rank

# Iteration caps by command when neither --max-iter nor OTECON_MAX_ITER is
# given; None defers to the solver's own size-dependent default.
_MAX_ITER_DEFAULTS = {
    "ot": None,
    "sinkhorn": 10000,
    "uot": 10000,
    "semidiscrete": 2000,
    "match-equilibrium": 10000,
    "match-fit": 1000,
    "match-sista": 20000,
}

_TE_FUNCTIONALS = {
    "diff": (lambda a, b: b - a, "submodular"),
    "product": (lambda a, b: a * b, "supermodular"),
    "sqdiff": (lambda a, b: (b - a) ** 2, "submodular"),
}


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return "%.17g" % x


def _to_json(value, indent: int = 0) -> str:
    """Serialize with %.17g floats; deterministic for identical inputs."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (
            f'{inner}"{key}": {_to_json(val, indent + 1)}'
            for key, val in value.items()
        )
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, np.ndarray):
        return _to_json(value.tolist(), indent)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = (f"{inner}{_to_json(val, indent + 1)}" for val in value)
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otecon",
        description="Optimal transport solvers and econometric bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = cmd("ot", "exact discrete transport by network simplex")
    p.add_argument("--mu", required=True, help="source measure CSV (w,x1..xd)")
    p.add_argument("--nu", required=True, help="target measure CSV")
    p.add_argument("--cost", required=True, help="cost matrix CSV")
    p.add_argument("--max-iter", type=int, help="pivot cap")

    p = cmd("sinkhorn", "entropic transport, log-domain Sinkhorn")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--cost", required=True)
    p.add_argument("--eps", type=float, required=True, help="regularization strength")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int)

    p = cmd("uot", "unbalanced entropic transport with soft marginals")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--cost", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lam-mu", type=float, required=True, help="source KL penalty")
    p.add_argument("--lam-nu", type=float, required=True, help="target KL penalty")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int)

    p = cmd("w1d", "p-Wasserstein distance between scalar samples")
    p.add_argument("--x", required=True, help="sample CSV, one value per row")
    p.add_argument("--y", required=True)
    p.add_argument("--p", type=float, default=2.0)

    p = cmd("gaussian-w2", "closed-form W2 between Gaussians")
    p.add_argument("--g1", required=True, help="mean row + covariance rows CSV")
    p.add_argument("--g2", required=True)

    p = cmd("sliced", "sliced Wasserstein distance between point clouds")
    p.add_argument("--x", required=True, help="points CSV, one row per point")
    p.add_argument("--y", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n-dir", type=int, default=100, help="number of directions")
    p.add_argument("--seed", type=int, default=0)

    p = cmd("semidiscrete", "Laguerre weights for uniform-to-discrete transport")
    p.add_argument("--nu", required=True, help="sites measure CSV (w,x1..xd)")
    p.add_argument("--grid-res", type=int, help="grid cells per axis")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int)

    p = cmd("ranks", "assignment-based vector ranks onto a Halton set")
    p.add_argument("--sample", required=True, help="points CSV")

    p = cmd("bounds-te", "rearrangement bounds for a treatment functional")
    p.add_argument("--y0", required=True, help="control sample CSV")
    p.add_argument("--y1", required=True, help="treated sample CSV")
    p.add_argument(
        "--functional",
        required=True,
        choices=sorted(_TE_FUNCTIONALS),
        help="diff: b-a, product: a*b, sqdiff: (b-a)^2",
    )

    p = cmd("bounds-subgroup", "quantile-window bounds on a subgroup effect")
    p.add_argument("--y0", required=True)
    p.add_argument("--y1", required=True)
    p.add_argument("--a", type=float, required=True, help="window lower rank")
    p.add_argument("--b", type=float, required=True, help="window upper rank")

    p = cmd("bounds-winners", "lower bound on the gaining fraction in a window")
    p.add_argument("--y0", required=True)
    p.add_argument("--y1", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)

    p = cmd("binary-ot", "minimal coupled mass on a 0/1 relation, with witness")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--gamma", required=True, help="0/1 relation matrix CSV")
    p.add_argument(
        "--witness",
        choices=["auto", "yes", "no"],
        default="auto",
        help="dual witness set enumeration (auto: only up to 20 rows)",
    )

    p = cmd("dro", "worst-case expectation over a transport ball")
    p.add_argument("--f", required=True, help="objective values CSV, one per row")
    p.add_argument("--delta", required=True, help="discrepancy matrix CSV")
    p.add_argument("--mu", required=True, help="reference weights CSV (w)")
    p.add_argument("--rho", type=float, required=True, help="ball radius")

    p = cmd("match-identify", "surplus matrix from matched and single counts")
    p.add_argument("--table", required=True, help="matching CSV (x,y,count)")

    p = cmd("match-equilibrium", "logit matching equilibrium for given surplus")
    p.add_argument("--phi", required=True, help="surplus matrix CSV")
    p.add_argument("--mu", required=True, help="x-side masses CSV (w)")
    p.add_argument("--nu", required=True, help="y-side masses CSV (w)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int)

    p = cmd("match-fit", "surplus coefficients by moment matching")
    p.add_argument("--table", required=True, help="matching CSV (x,y,count)")
    p.add_argument("--basis", required=True, help="basis CSV (x,y,k,value)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int)

    p = cmd("match-sista", "sparse surplus coefficients from an observed plan")
    p.add_argument("--pi", required=True, help="observed plan matrix CSV")
    p.add_argument("--mu", required=True, help="row marginals CSV (w)")
    p.add_argument("--nu", required=True, help="column marginals CSV (w)")
    p.add_argument("--basis", required=True, help="basis CSV (x,y,k,value)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--l1", type=float, default=0.0, help="soft-threshold penalty")
    p.add_argument("--step", type=float, help="gradient step (default 1/L)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int)

    return parser


def _resolve_max_iter(args: argparse.Namespace) -> None:
    """Fill in the iteration cap: flag beats OTECON_MAX_ITER beats default."""
    if not hasattr(args, "max_iter") or args.max_iter is not None:
        return
    env = os.environ.get("OTECON_MAX_ITER")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"OTECON_MAX_ITER is not an integer: {env!r}") from None
        if cap < 1:
            raise DomainError(f"OTECON_MAX_ITER must be at least 1, got {cap}")
        args.max_iter = cap
    else:
        args.max_iter = _MAX_ITER_DEFAULTS[args.command]


def _cmd_ot(args):
    mu = read_measure_csv(args.mu)
    nu = read_measure_csv(args.nu)
    cost = CostMatrix(read_matrix_csv(args.cost))
    plan, pots, value = solve_discrete_ot(mu, nu, cost, max_iter=args.max_iter)
    result = {
        "value": value,
        "plan": plan.mass,
        "phi": pots.phi,
        "psi": pots.psi,
        "certified": verify_optimality(plan, pots, cost),
    }
    diagnostics = {
        "converged": True,
        "residual": plan.marginal_residual(mu, nu),
    }
    return result, diagnostics, True


def _cmd_sinkhorn(args):
    mu = read_measure_csv(args.mu)
    nu = read_measure_csv(args.nu)
    cost = CostMatrix(read_matrix_csv(args.cost))
    sol = sinkhorn(mu, nu, cost, eps=args.eps, tol=args.tol, max_iter=args.max_iter)
    if sol.converged:
        transport, entropic = eot_value(sol, cost)
    else:
        transport = float(np.sum(sol.plan * cost.entries))
        entropic = None
    result = {
        "value": transport,
        "entropic_value": entropic,
        "plan": sol.plan,
        "phi": sol.phi,
        "psi": sol.psi,
    }
    diagnostics = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual": sol.marginal_error,
    }
    return result, diagnostics, sol.converged


def _cmd_uot(args):
    mu = read_measure_csv(args.mu)
    nu = read_measure_csv(args.nu)
    cost = CostMatrix(read_matrix_csv(args.cost))
    sol = unbalanced_sinkhorn(
        mu,
        nu,
        cost,
        eps=args.eps,
        lam_mu=args.lam_mu,
        lam_nu=args.lam_nu,
        tol=args.tol,
        max_iter=args.max_iter,
    )
    result = {
        "value": float(np.sum(sol.plan * cost.entries)),
        "plan": sol.plan,
        "phi": sol.phi,
        "psi": sol.psi,
        "marginal_gap": sol.marginal_error,
    }
    diagnostics = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual": sol.marginal_errors[-1] if sol.marginal_errors else None,
    }
    return result, diagnostics, sol.converged


def _cmd_w1d(args):
    x = read_sample_csv(args.x)
    y = read_sample_csv(args.y)
    return {"value": wasserstein_1d(x, y, p=args.p)}, {"converged": True}, True


def _cmd_gaussian_w2(args):
    g1 = read_gaussian_csv(args.g1)
    g2 = read_gaussian_csv(args.g2)
    return {"value": gaussian_w2(g1, g2)}, {"converged": True}, True


def _cmd_sliced(args):
    x = read_points_csv(args.x)
    y = read_points_csv(args.y)
    value = sliced_wasserstein(x, y, p=args.p, n_dir=args.n_dir, seed=args.seed)
    return {"value": value}, {"converged": True}, True


def _cmd_semidiscrete(args):
    nu = read_measure_csv(args.nu)
    if nu.points is None:
        raise DomainError(f"{args.nu}: sites need coordinate columns x1..xd")
    diagram = semidiscrete_solve(
        nu, nu.dim, grid_res=args.grid_res, tol=args.tol, max_iter=args.max_iter
    )
    result = {
        "sites": diagram.sites,
        "weights": diagram.weights,
        "target_masses": diagram.target_masses,
    }
    diagnostics = {
        "converged": diagram.converged,
        "iterations": diagram.iterations,
        "objective": diagram.objectives[-1],
    }
    return result, diagnostics, diagram.converged


def _cmd_ranks(args):
    sample = read_points_csv(args.sample)
    assignment = vector_rank(sample)
    result = {
        "permutation": [int(k) for k in assignment.permutation],
        "halton": assignment.reference.points,
        "ranks": assignment.ranks,
    }
    return result, {"converged": True}, True


def _cmd_bounds_te(args):
    y0 = read_sample_csv(args.y0)
    y1 = read_sample_csv(args.y1)
    h, modularity = _TE_FUNCTIONALS[args.functional]
    interval = rearrangement_bounds(h, y0, y1, modularity)
    result = {"lower": interval.lower, "upper": interval.upper}
    return result, {"converged": True}, True


def _cmd_bounds_subgroup(args):
    y0 = read_sample_csv(args.y0)
    y1 = read_sample_csv(args.y1)
    interval = kaji_subgroup_bounds(args.a, args.b, y0, y1)
    result = {"lower": interval.lower, "upper": interval.upper}
    return result, {"converged": True}, True


def _cmd_bounds_winners(args):
    y0 = read_sample_csv(args.y0)
    y1 = read_sample_csv(args.y1)
    value = winners_lower_bound(args.a, args.b, y0, y1)
    return {"value": value}, {"converged": True}, True


def _cmd_binary_ot(args):
    mu = read_measure_csv(args.mu)
    nu = read_measure_csv(args.nu)
    rel = BinaryRelation(read_matrix_csv(args.gamma))
    witness = {"auto": None, "yes": True, "no": False}[args.witness]
    value, witness_set = binary_cost_ot(mu, nu, rel, witness=witness)
    result = {
        "value": value,
        "witness": None if witness_set is None else sorted(witness_set),
    }
    return result, {"converged": True}, True


def _cmd_dro(args):
    f = read_values_csv(args.f)
    delta = CostMatrix(read_matrix_csv(args.delta))
    mu = read_measure_csv(args.mu)
    value = dro_expectation_bound(f, delta, mu, rho=args.rho)
    return {"value": value}, {"converged": True}, True


def _cmd_match_identify(args):
    table = read_matching_csv(args.table)
    phi = cs_identify(table)
    return {"Phi": phi.entries}, {"converged": True}, True


def _cmd_match_equilibrium(args):
    phi = CostMatrix(read_matrix_csv(args.phi))
    mu = read_measure_csv(args.mu).weights
    nu = read_measure_csv(args.nu).weights
    table = cs_equilibrium(phi, mu, nu, tol=args.tol, max_iter=args.max_iter)
    residual = max(
        float(np.max(np.abs(table.flows.sum(axis=1) + table.singles_x - mu))),
        float(np.max(np.abs(table.flows.sum(axis=0) + table.singles_y - nu))),
    )
    result = {
        "flows": table.flows,
        "singles_x": table.singles_x,
        "singles_y": table.singles_y,
    }
    diagnostics = {
        "converged": table.converged,
        "iterations": table.iterations,
        "residual": residual,
    }
    return result, diagnostics, table.converged


def _cmd_match_fit(args):
    table = read_matching_csv(args.table)
    basis = SurplusBasis(read_basis_csv(args.basis, shape=table.flows.shape))
    lam, a, b, info = moment_matching(
        table, basis, tol=args.tol, max_iter=args.max_iter, log=True
    )
    result = {"lam": lam, "a": a, "b": b}
    diagnostics = {
        "converged": True,
        "iterations": len(info["objectives"]) - 1,
        "objective": info["objectives"][-1],
    }
    return result, diagnostics, True


def _cmd_match_sista(args):
    pi_hat = read_matrix_csv(args.pi)
    mu = read_measure_csv(args.mu).weights
    nu = read_measure_csv(args.nu).weights
    basis = SurplusBasis(read_basis_csv(args.basis, shape=pi_hat.shape))
    beta, info = sista(
        pi_hat,
        mu,
        nu,
        basis,
        eps=args.eps,
        l1=args.l1,
        step=args.step,
        tol=args.tol,
        max_iter=args.max_iter,
        log=True,
    )
    result = {"beta": beta}
    diagnostics = {
        "converged": True,
        "iterations": len(info["objectives"]),
        "objective": info["objectives"][-1],
    }
    return result, diagnostics, True


_HANDLERS = {
    "ot": _cmd_ot,
    "sinkhorn": _cmd_sinkhorn,
    "uot": _cmd_uot,
    "w1d": _cmd_w1d,
    "gaussian-w2": _cmd_gaussian_w2,
    "sliced": _cmd_sliced,
    "semidiscrete": _cmd_semidiscrete,
    "ranks": _cmd_ranks,
    "bounds-te": _cmd_bounds_te,
    "bounds-subgroup": _cmd_bounds_subgroup,
    "bounds-winners": _cmd_bounds_winners,
    "binary-ot": _cmd_binary_ot,
    "dro": _cmd_dro,
    "match-identify": _cmd_match_identify,
    "match-equilibrium": _cmd_match_equilibrium,
    "match-fit": _cmd_match_fit,
    "match-sista": _cmd_match_sista,
}


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"command"}
    return {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in skip
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve_max_iter(args)
        result, diagnostics, converged = _HANDLERS[args.command](args)
    except (DomainError, ResourceError, ExpOverflowError) as exc:
        print(f"otecon {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"otecon {args.command}: {exc}", file=sys.stderr)
        return 2
    except (SolverStallError, NonIdentificationError, StepSizeError, NonAssignmentError) as exc:
        print(f"otecon {args.command}: {exc}", file=sys.stderr)
        return 3

    document = {
        "command": args.command,
        "version": __version__,
        "config": _config_echo(args),
        "result": result,
        "diagnostics": diagnostics,
    }
    text = _to_json(document) + "\n"
    if args.out is not None:
        try:
            with open(args.out, "w") as handle:
                handle.write(text)
        except OSError as exc:
            print(f"otecon {args.command}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0 if converged else 3


if __name__ == "__main__":
    sys.exit(main())
