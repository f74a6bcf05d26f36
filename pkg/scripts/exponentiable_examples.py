"""Series values and divergence witnesses for the two built-in step functions."""
import argparse
import math

from kms_lab.exponentiable import example1, example2, exponentiable_series


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lams", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0, 3.0])
    ap.add_argument("--p", type=float, default=1.0)
    args = ap.parse_args()
    for name, f in (("example1", example1()), ("example2", example2()), ("2*example2", example2(2.0))):
        for lam in args.lams:
            c = exponentiable_series(f, args.p, lam)
            extra = ""
            if name == "example1" and args.p == 1 and c.converges:
                ref = 2 * math.expm1(math.exp(lam)) * math.expm1(lam) / math.exp(lam)
                extra = f" closed form {ref:.12g}"
            if c.diverges:
                w = c.divergence_witness
                extra = f" ratio >= {w.get('ratio_lower_bound', w.get('inner_ratio_lower_bound')):.6f}"
            value = "-" if c.value is None else f"{c.value:.12g}"
            print(f"{name:>11} lam={lam:<5} {c.verdict:>12} value={value:<20} tail={c.tail_bound:.2e}{extra}")


if __name__ == "__main__":
    main()
