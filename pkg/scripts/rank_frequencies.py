"""Empirical check that center-outward ranks of an exchangeable sample are
uniform over permutations.

Draws i.i.d. Gaussian samples of size n, computes the rank assignment of each,
and tabulates how often every permutation of the reference set occurs.  With
n! equally likely outcomes the observed frequencies should sit within a few
standard errors of 1/n!.
"""

import argparse
import itertools
import math

import numpy as np

from otecon import vector_rank


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=3, help="sample size (keep n! small)")
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--reps", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.n > 6:
        parser.error("n! cells get too sparse past n=6")

    rng = np.random.default_rng(args.seed)
    counts = {p: 0 for p in itertools.permutations(range(args.n))}
    for _ in range(args.reps):
        sample = rng.standard_normal((args.n, args.dim))
        counts[tuple(vector_rank(sample).permutation)] += 1

    p = 1.0 / math.factorial(args.n)
    se = math.sqrt(p * (1.0 - p) / args.reps)
    print(f"expected frequency {p:.4f}, standard error {se:.4f}")
    print(f"{'permutation':>16} {'freq':>8} {'z':>7}")
    worst = 0.0
    for perm, c in sorted(counts.items()):
        freq = c / args.reps
        z = (freq - p) / se
        worst = max(worst, abs(z))
        print(f"{str(perm):>16} {freq:>8.4f} {z:>7.2f}")
    print(f"largest |z| = {worst:.2f}")


if __name__ == "__main__":
    main()
