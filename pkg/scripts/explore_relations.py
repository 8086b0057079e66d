"""Candidate linear relations among basis elements, weight by weight.

Output is evidence to the stated q-order, not a proof.  Example: compare
the dimensions of BD and MD up to weight 4.

    python scripts/explore_relations.py --families MD BD --max-weight 4 --order 60
"""
import argparse
import warnings

from qzk.linalg import rank
from qzk.span import enumerate_basis, find_relations, select_weight


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--families", nargs="+", default=["MD", "BD"])
    ap.add_argument("--max-weight", type=int, default=4)
    ap.add_argument("--order", type=int, default=60)
    ap.add_argument("--show", action="store_true", help="print the relations themselves")
    args = ap.parse_args()
    warnings.simplefilter("ignore", RuntimeWarning)
    for fam in args.families:
        basis = enumerate_basis(fam, args.max_weight, args.order)
        for w in range(args.max_weight + 1):
            sub = select_weight(basis, w, "at_most")
            cols = [b.series.coeffs for b in sub]
            weak = args.order + 1 < len(sub) + 10
            print(f"{fam:>5} weight <= {w}: {len(sub):3d} elements, rank {rank(cols):3d}"
                  + ("  (weak: few equations)" if weak else ""))
        if args.show:
            for rel in find_relations(basis, args.order):
                print("   ", " + ".join(f"({v})*{k}" for k, v in rel.items()), "= 0")


if __name__ == "__main__":
    main()
