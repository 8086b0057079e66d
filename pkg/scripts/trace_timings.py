"""Wall time and stored-term counts for the named traces at a few truncations."""
import argparse
import time

from qzk.products import TraceSpec, build_trace, estimate_terms, trace_ring

CASES = [
    ("lemma31", dict(N=20, D=4)),
    ("lemma31", dict(N=40, D=6)),
    ("thm32:3", dict(N=20, D=3)),
    ("bo", dict(N=40, D=8)),
    ("pn:2", dict(N=10, D=4)),
    ("pn:2", dict(N=24, D=4)),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--with-ab", action="store_true")
    args = ap.parse_args()
    for name, kw in CASES:
        spec = TraceSpec.parse(name, with_ab=args.with_ab and name.startswith("pn"), **kw)
        t0 = time.perf_counter()
        p = build_trace(spec)
        dt = time.perf_counter() - t0
        stored = sum(1 for _ in p.items())
        print(f"{name:>8} N={kw['N']:<3} D={kw['D']}: {dt:7.2f}s  {stored:7d} stored  "
              f"(bound {estimate_terms(trace_ring(spec))})")


if __name__ == "__main__":
    main()
