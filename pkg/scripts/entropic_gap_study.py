"""Measure how far the entropic transport cost sits above the exact LP value.

For each trial the script draws a random instance, solves it exactly, then
runs the regularized solver over a grid of eps values and prints the observed
gap next to the eps*log(m*n) ceiling.
"""

import argparse

import numpy as np

from otecon import CostMatrix, DiscreteMeasure, eot_value, sinkhorn, solve_discrete_ot


def random_instance(rng, m, n):
    mu = rng.uniform(0.1, 1.0, size=m)
    nu = rng.uniform(0.1, 1.0, size=n)
    return (
        DiscreteMeasure(mu / mu.sum()),
        DiscreteMeasure(nu / nu.sum()),
        CostMatrix(rng.uniform(0.0, 1.0, size=(m, n))),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=4)
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument(
        "--eps", type=float, nargs="+", default=[1.0, 0.3, 0.1, 0.03, 0.01]
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    bound_factor = np.log(args.m * args.n)
    print(f"{'trial':>5} {'eps':>8} {'gap':>12} {'eps*ln(mn)':>12} {'iters':>7}")
    for trial in range(args.trials):
        mu, nu, cost = random_instance(rng, args.m, args.n)
        _, _, exact = solve_discrete_ot(mu, nu, cost)
        for eps in sorted(args.eps, reverse=True):
            sol = sinkhorn(mu, nu, cost, eps=eps, max_iter=500000)
            if not sol.converged:
                print(f"{trial:>5} {eps:>8.3g} {'did not converge':>25}")
                continue
            transport, _ = eot_value(sol, cost)
            gap = transport - exact
            print(
                f"{trial:>5} {eps:>8.3g} {gap:>12.3e} "
                f"{eps * bound_factor:>12.3e} {sol.iterations:>7}"
            )


if __name__ == "__main__":
    main()
