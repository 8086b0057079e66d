"""Fraction-free (Bareiss) elimination over the integers.

Rows are scaled to integers first; the echelon form keeps integer entries
and every division is exact.  Pivots are the first non-zero entry of each
column in row order, and columns are visited left to right, so results are
deterministic.
"""
from __future__ import annotations

import math
from typing import Sequence

from gmpy2 import mpq, mpz


def integer_rows(rows: Sequence[Sequence]) -> list[list]:
    """Scale each row of rationals by the lcm of its denominators."""
    out = []
    for row in rows:
        qs = [mpq(x) for x in row]
        den = 1
        for x in qs:
            den = math.lcm(den, int(x.denominator))
        out.append([mpz(x * den) for x in qs])
    return out


def bareiss_echelon(M: list[list], pivot_cols: int | None = None) -> tuple[list[list], list[int]]:
    """Row echelon form by fraction-free elimination; returns ``(E, pivots)``.

    Only the first ``pivot_cols`` columns are eligible as pivots (the rest,
    e.g. an augmented right-hand side, are carried along).
    """
    E = [list(r) for r in M]
    nrows = len(E)
    ncols = len(E[0]) if E else 0
    if pivot_cols is None:
        pivot_cols = ncols
    prev = mpz(1)
    r = 0
    pivots: list[int] = []
    for c in range(pivot_cols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if E[i][c]), None)
        if p is None:
            continue
        if p != r:
            E[r], E[p] = E[p], E[r]
        piv = E[r][c]
        for i in range(r + 1, nrows):
            a = E[i][c]
            row_i, row_r = E[i], E[r]
            for j in range(c + 1, ncols):
                num = piv * row_i[j] - a * row_r[j]
                q, rem = divmod(num, prev)
                if rem:
                    raise ArithmeticError("inexact Bareiss division")  # pragma: no cover
                row_i[j] = q
            row_i[c] = mpz(0)
        # rows above r keep their values; only entries below the pivot are cleared
        prev = piv
        pivots.append(c)
        r += 1
    return E, pivots


def _back_substitute(E, pivots, n, rhs_col: int | None, free_values: dict[int, mpq]) -> list[mpq]:
    x = [mpq(0)] * n
    for f, v in free_values.items():
        x[f] = mpq(v)
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        acc = mpq(E[r][rhs_col]) if rhs_col is not None else mpq(0)
        for j in range(c + 1, n):
            if E[r][j] and x[j]:
                acc -= E[r][j] * x[j]
        x[c] = acc / E[r][c]
    return x


def solve(columns: Sequence[Sequence], target: Sequence) -> tuple[list[mpq] | None, int]:
    """Solve ``sum_j x_j columns[j] = target``; free variables are set to 0.

    Returns ``(x, rank)`` with ``x = None`` when the system is inconsistent.
    """
    n = len(columns)
    m = len(target)
    rows = [[columns[j][i] for j in range(n)] + [target[i]] for i in range(m)]
    E, piv = bareiss_echelon(integer_rows(rows), n)
    for r in range(len(piv), m):
        if E[r][n]:
            return None, len(piv)
    return _back_substitute(E, piv, n, n, {}), len(piv)


def nullspace(columns: Sequence[Sequence]) -> list[list[mpq]]:
    """Basis of ``{x : sum_j x_j columns[j] = 0}``, one vector per free column.

    Each vector is scaled so that its first non-zero entry is positive.
    """
    n = len(columns)
    if n == 0:
        return []
    m = len(columns[0])
    rows = [[columns[j][i] for j in range(n)] for i in range(m)]
    E, piv = bareiss_echelon(integer_rows(rows), n)
    free = [j for j in range(n) if j not in set(piv)]
    out = []
    for f in free:
        x = _back_substitute(E, piv, n, None, {f: mpq(1)})
        lead = next(v for v in x if v)
        if lead < 0:
            x = [-v for v in x]
        out.append(x)
    return out


def rank(columns: Sequence[Sequence]) -> int:
    if not columns:
        return 0
    m = len(columns[0])
    rows = [[col[i] for col in columns] for i in range(m)]
    return len(bareiss_echelon(integer_rows(rows))[1])
