"""How often spectral-cut differences fail to decrease strictly, per dimension."""
import argparse

import numpy as np

from kms_lab.linalg import op_norm, random_density, random_hermitian
from kms_lab.modular import build_gns
from kms_lab.perturbation import approximation_stability


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for d in args.dims:
        rng = np.random.default_rng([args.seed, d])
        bad, top = 0, 0.0
        example = None
        for _ in range(args.instances):
            ctx = build_gns(random_density(rng, d))
            H = random_hermitian(rng, d)
            Q = H / op_norm(H)
            mags = np.sort(np.abs(np.linalg.eigvalsh(Q)))
            cuts = sorted({0.0, *(0.5 * (a + b) for a, b in zip(mags[:-1], mags[1:])), 1.0})
            diffs = approximation_stability(ctx, Q, cuts).term_norms
            top = max(top, diffs[-1])
            if not all(b < a for a, b in zip(diffs, diffs[1:])):
                bad += 1
                example = example or [round(x, 5) for x in diffs]
        print(f"dim {d}: {bad}/{args.instances} not strictly decreasing, max top-cut difference {top:.1e}"
              + (f", e.g. {example}" if example else ""))


if __name__ == "__main__":
    main()
