import itertools
import math
import os

import hypothesis
from gmpy2 import mpq

from qzk.series import QSeries

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=8, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.environ.get("QZK_HYPOTHESIS_PROFILE", "default"))


def qs(*coeffs, N=None):
    """QSeries from listed coefficients; N defaults to the last listed index."""
    return QSeries([mpq(c) for c in coeffs], len(coeffs) - 1 if N is None else N)


# Brute-force oracles.  They share no code with the package: plain loops
# over the defining sums, with Python ints and gmpy2 rationals only.


def brute_bibracket(s, r, N):
    """sum over n_1 > ... > n_l > 0 and d_i > 0 of prod n_i^r_i/r_i! d_i^(s_i-1)/(s_i-1)! q^(sum n_i d_i)."""
    out = [mpq(0)] * (N + 1)
    l = len(s)
    if l == 0:
        out[0] = mpq(1)
        return QSeries(out, N)

    def rec(i, upper, qdeg, w):
        if i == l:
            out[qdeg] += w
            return
        for n in range(1, upper):
            if qdeg + n > N:
                break
            for d in range(1, (N - qdeg) // n + 1):
                c = mpq(n) ** r[i] / math.factorial(r[i]) * mpq(d) ** (s[i] - 1) / math.factorial(s[i] - 1)
                rec(i + 1, n, qdeg + n * d, w * c)

    rec(0, N + 2, 0, mpq(1))
    return QSeries(out, N)


def brute_bracket(s, N):
    return brute_bibracket(tuple(s), (0,) * len(s), N)


def brute_power_sum(ts, n, total_eq):
    """sum of prod d_i^t_i over d_i >= 1 with sum d = n (total_eq) or sum d <= n."""
    acc = mpq(0)
    for ds in itertools.product(range(1, n + 1), repeat=len(ts)):
        tot = sum(ds)
        if (tot == n) if total_eq else (tot <= n):
            acc += math.prod(mpq(d) ** t for d, t in zip(ds, ts))
    return acc


def brute_sumspec(A, B, a0, rel, N):
    """sum over strict chains n_1 > ... (A from a0, B from 1) of prod n^u d^t q^(n d), constraint on d sums."""
    out = [mpq(0)] * (N + 1)

    def chains(exps, start):
        res = []

        def rec(i, upper, qdeg, dsum, w):
            if i == len(exps):
                res.append((qdeg, dsum, w))
                return
            u, t = exps[i]
            for n in range(start, upper):
                for d in range(1, N + 1):
                    if n * d + qdeg > N:
                        break
                    rec(i + 1, n, qdeg + n * d, dsum + d, w * mpq(n) ** u * mpq(d) ** t)

        rec(0, N + 1, 0, 0, mpq(1))
        return res

    cmp = {"eq": lambda a, b: a == b, "lt": lambda a, b: a < b, "gt": lambda a, b: a > b}[rel]
    for qa, da, wa in chains(A, a0):
        for qb, db, wb in chains(B, 1):
            if qa + qb <= N and cmp(da, db):
                out[qa + qb] += wa * wb
    return QSeries(out, N)


# Acceptance lines are collected here and printed after the run, so they
# show up in the log even when output capture is on.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
