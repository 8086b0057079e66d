"""Built-in property suite for ``qzk selftest``.

Deterministic (fixed seeds), exact, and small enough to finish in seconds.
The pytest suite runs the same properties under hypothesis with wider
ranges; this one exists so an installed copy can check itself without
test dependencies.
"""
from __future__ import annotations

import itertools
import random
import traceback

from gmpy2 import mpq

from . import linalg
from .products import PochFactor, TraceSpec, build_trace, poch_product, trace_factors, trace_ring, y0_coefficient
from .reduction import (Chain, SumSpec, composition_sum, eliminate, faulhaber, power_sum_eq, power_sum_le,
                        sumspec_eval)
from .series import QSeries, Ring, RingElement, bell_coefficient, exp_truncated
from .special import bibracket, bibracket_eulerian, bibracket_indices, bracket
from .theorems import eisenstein_identities, z_identities

SEED = 1729


def random_element(rng: random.Random, ring: Ring, n_terms: int = 4, nilpotent: bool = False) -> RingElement:
    nf, ny = len(ring.formal_vars), len(ring.y_vars)
    t = {}
    for _ in range(n_terms):
        deg = rng.randint(0, ring.D)
        f = [0] * nf
        for _ in range(deg):
            f[rng.randrange(nf)] += 1
        y = tuple(rng.randint(-1, 1) for _ in range(ny))
        lo = 1 if nilpotent and deg == 0 else 0
        coeffs = {k: mpq(rng.randint(-3, 3), rng.randint(1, 3)) for k in range(lo, ring.N + 1) if rng.random() < 0.4}
        s = QSeries.from_dict(coeffs, ring.N)
        key = (tuple(f), y)
        t[key] = t[key] + s if key in t else s
    return RingElement(ring, t)


# ---------------------------------------------------------------------------
# checks; each raises AssertionError on failure
# ---------------------------------------------------------------------------


def check_ring_axioms():
    rng = random.Random(SEED)
    ring = Ring(("x", "u"), ("y",), N=5, D=3, Y=3)
    for _ in range(15):
        a, b, c = (random_element(rng, ring) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert a + ring.zero() == a and a * ring.one() == a
        assert (a - a) == ring.zero()


def check_exp_additive():
    rng = random.Random(SEED + 1)
    ring = Ring(("x", "u"), (), N=5, D=3)
    for _ in range(8):
        p, r = random_element(rng, ring, nilpotent=True), random_element(rng, ring, nilpotent=True)
        assert exp_truncated(p + r) == exp_truncated(p) * exp_truncated(r)


def check_bell_vs_exp():
    rng = random.Random(SEED + 2)
    N, M = 4, 6
    ring = Ring(("z",), (), N=N, D=M)
    for _ in range(5):
        derivs = [QSeries.from_dict({k: mpq(rng.randint(-4, 4), rng.randint(1, 4)) for k in range(N + 1)}, N)
                  for _ in range(M)]
        f = ring.zero()
        fact = 1
        for t, d in enumerate(derivs, start=1):
            fact *= t
            f = f + ring.monomial({"z": t}, coeff=d.scale(mpq(1, fact)))
        e = exp_truncated(f)
        for m in range(1, M + 1):
            assert e.coefficient((m,)).y0_part() == bell_coefficient(derivs, m)


def check_faulhaber_loops():
    for t in range(0, 8):
        S = faulhaber(t)
        for n in range(0, 12):
            assert S(n) == sum(mpq(k) ** t for k in range(1, n + 1))
    for ts in itertools.product(range(1, 4), repeat=2):
        le, eq = power_sum_le(ts), power_sum_eq(ts)
        for n in range(0, 9):
            brute_le = sum(mpq(a) ** ts[0] * mpq(b) ** ts[1]
                           for a in range(1, n + 1) for b in range(1, n + 1 - a))
            brute_eq = sum(mpq(a) ** ts[0] * mpq(n - a) ** ts[1] for a in range(1, n))
            assert le(n) == brute_le and eq(n) == brute_eq
    for ts in itertools.product(range(0, 3), repeat=3):
        C = composition_sum(ts)
        for n in range(1, 9):
            brute = sum(mpq(a) ** ts[0] * mpq(b) ** ts[1] * mpq(n - a - b) ** ts[2]
                        for a in range(1, n) for b in range(1, n - a))
            assert C(n) == brute
        if min(ts) >= 1:
            assert C == power_sum_eq(ts)


def check_bibracket_dual():
    for w in range(1, 6):
        for idx in bibracket_indices(w):
            assert bibracket(idx, 14) == bibracket_eulerian(idx, 14), str(idx)


def check_truncation_prefix():
    for s in [(2,), (3, 1), (2, 2), (1, 2, 1)]:
        assert bracket(s, 20).truncate(9) == bracket(s, 9)
    lo = build_trace(TraceSpec("lemma31", 6, 3))
    hi = build_trace(TraceSpec("lemma31", 11, 3))
    for (f, y), s in hi.items():
        assert lo.coefficient(f).y0_part() == s.truncate(6)


def check_y_saturation():
    base = y0_coefficient(build_trace(TraceSpec("trace_PN", 6, 2, None)))
    wide = y0_coefficient(build_trace(TraceSpec("trace_PN", 6, 2, 11)))
    assert {f: s for (f, _), s in base.items()} == {f: s for (f, _), s in wide.items()}


def check_product_routes():
    for spec in [TraceSpec("lemma31", 8, 3), TraceSpec("bloch_okounkov", 8, 4), TraceSpec("theorem32", 6, 3, r=2)]:
        ring, fs = trace_ring(spec), trace_factors(spec)
        assert poch_product(fs, ring, "direct") == poch_product(fs, ring, "exp")


def check_euler_pentagonal():
    N = 40
    p = poch_product([PochFactor((), (), 1, 1)], Ring((), (), N=N, D=0))
    expect = {}
    for k in range(-6, 7):
        e = k * (3 * k - 1) // 2
        if e <= N:
            expect[e] = mpq((-1) ** (k % 2))
    assert p.coefficient(()).y0_part() == QSeries.from_dict(expect, N)


def check_ab_specialisation():
    N, D = 6, 2
    plain = y0_coefficient(build_trace(TraceSpec("trace_PN", N, D, players=2)))
    ab = y0_coefficient(build_trace(TraceSpec("trace_PN", N, D, players=2, with_ab=True)))
    ab = ab.specialize_zero(["a", "b"])
    assert {f: s for (f, _), s in plain.items()} == {f: s for (f, _), s in ab.items()}


def check_reduction_random():
    rng = random.Random(SEED + 3)
    for _ in range(25):
        r = rng.randint(1, 2)
        s = rng.randint(1, 4 - r)
        A = tuple((rng.randint(0, 2), rng.randint(0, 2)) for _ in range(r))
        B = tuple((rng.randint(0, 2), rng.randint(0, 2)) for _ in range(s))
        if rng.random() < 0.5:
            spec = SumSpec.W(A, B)
        else:
            rel = rng.choice(["eq", "lt", "gt"])
            spec = SumSpec((Chain(A, 1, "strict", "A"), Chain(B, 1, "strict", "B")), rel)
        assert eliminate(spec).evaluate(10) == sumspec_eval(spec, 10), spec


def check_linalg():
    rng = random.Random(SEED + 4)
    for _ in range(20):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        cols = [[mpq(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(m)] for _ in range(n)]
        x0 = [mpq(rng.randint(-2, 2)) for _ in range(n)]
        b = [sum(cols[j][i] * x0[j] for j in range(n)) for i in range(m)]
        x, _ = linalg.solve(cols, b)
        assert x is not None
        assert all(sum(cols[j][i] * x[j] for j in range(n)) == b[i] for i in range(m))
        ns = linalg.nullspace(cols)
        assert len(ns) == n - linalg.rank(cols)
        for v in ns:
            assert all(sum(cols[j][i] * v[j] for j in range(n)) == 0 for i in range(m))


def check_identities():
    for name, lhs, rhs in z_identities(30) + eisenstein_identities(30):
        assert lhs == rhs, name


CHECKS = [
    ("ring axioms", check_ring_axioms),
    ("exp(p+r) = exp(p) exp(r)", check_exp_additive),
    ("Bell coefficients vs exp", check_bell_vs_exp),
    ("Faulhaber and power sums vs loops", check_faulhaber_loops),
    ("bi-bracket divisor vs Eulerian formula", check_bibracket_dual),
    ("truncation prefix stability", check_truncation_prefix),
    ("y-bound saturation soundness", check_y_saturation),
    ("direct vs exp products", check_product_routes),
    ("Euler pentagonal product", check_euler_pentagonal),
    ("a = b = 0 specialisation", check_ab_specialisation),
    ("elimination vs brute force", check_reduction_random),
    ("fraction-free linear algebra", check_linalg),
    ("Z-value and Eisenstein identities", check_identities),
]


def run_all() -> list[dict]:
    out = []
    for name, fn in CHECKS:
        try:
            fn()
            out.append({"name": name, "passed": True})
        except Exception as exc:  # report, do not abort the suite
            last = traceback.extract_tb(exc.__traceback__)[-1]
            out.append({"name": name, "passed": False,
                        "error": f"{type(exc).__name__}: {exc} (line {last.lineno})"})
    return out


__all__ = ["CHECKS", "run_all", "random_element"]
