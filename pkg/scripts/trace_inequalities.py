"""Minimum slack of the trace inequalities over random instances, per dimension."""
import argparse
import math

import numpy as np

from kms_lab.linalg import random_matrix
from kms_lab.schatten import INF, check_holder, check_interpolation, check_minkowski, check_three_term_holder


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'dim':>4} {'holder':>12} {'holder3':>12} {'minkowski':>12} {'interp':>12}")
    for d in args.dims:
        rng = np.random.default_rng([args.seed, d])
        worst = [math.inf] * 4
        for _ in range(args.trials):
            A, B = random_matrix(rng, d, 1.0), random_matrix(rng, d, 1.0)
            w = float(rng.uniform(0.05, 0.95))
            r = float(rng.uniform(1, 4))
            slacks = (check_holder([A, B], [1 / w, 1 / (1 - w)]).slack,
                      check_three_term_holder(A, B, r / w, r / (1 - w), r).slack,
                      check_minkowski(A, B, float(rng.choice([1.0, 2.0, 3.0, INF]))).slack,
                      check_interpolation(A, 1.0, 1.0 + r, INF if w < 0.3 else 2.0 + 2 * r).slack)
            worst = [min(a, b) for a, b in zip(worst, slacks)]
        print(f"{d:>4} " + " ".join(f"{x:>12.3e}" for x in worst))


if __name__ == "__main__":
    main()
