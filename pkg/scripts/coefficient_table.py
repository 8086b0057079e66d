"""Print the low-degree coefficients of the two-variable trace with their bracket coordinates.

    python scripts/coefficient_table.py --order 20 --degree 5
"""
import argparse

from qzk.products import TraceSpec, build_trace
from qzk.span import verify_weighted_membership


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--order", type=int, default=20)
    ap.add_argument("--degree", type=int, default=4)
    args = ap.parse_args()
    p = build_trace(TraceSpec("lemma31", args.order, args.degree))
    rep = verify_weighted_membership(p, "qMZV", "exact")
    for e in rep.entries:
        coords = {k: v for k, v in e.certificate.coordinates.items() if v}
        if not coords:
            continue
        expr = " + ".join(f"({v})*{k}" for k, v in coords.items())
        print(f"{e.monomial:>10}  weight {e.degree}  {expr}  {'ok' if e.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
