"""Per-order norms of the perturbed-vector series against the exponential oracle."""
import argparse

import numpy as np

from kms_lab.linalg import op_norm, random_density, random_hermitian
from kms_lab.modular import build_gns
from kms_lab.perturbation import path_sum_terms, perturbed_vector_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--qnorm", type=float, default=1.0)
    ap.add_argument("--order", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="optional output path")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    ctx = build_gns(random_density(rng, args.dim))
    H = random_hermitian(rng, args.dim)
    Q = args.qnorm * H / op_norm(H)
    ref = ctx.to_eigen(perturbed_vector_oracle(ctx, Q))
    partial = np.zeros_like(ref)
    lines = ["order,term_norm,error"]
    for n, term in enumerate(path_sum_terms(ctx, Q, 0.5, args.order)):
        partial = partial + term
        lines.append(f"{n},{np.linalg.norm(term):.6e},{np.linalg.norm(partial - ref):.6e}")
    print("\n".join(lines))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
