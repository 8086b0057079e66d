"""Named q-series: brackets, bi-brackets, Okounkov Z-values, Eisenstein series.

Every constructor returns a :class:`~qzk.series.QSeries` truncated at the
requested order.  Results are memoised per ``(index, N)``.

Two independent routes compute bi-brackets:

* :func:`bibracket` sums the divisor-style kernel
  ``(u^r/r!) sum_v v^(s-1)/(s-1)! q^(uv)`` over strict chains of ``u``;
* :func:`bibracket_eulerian` uses the rational kernel
  ``(n^r/r!) q^n P_{s-1}(q^n) / ((s-1)! (1-q^n)^s)``.

They are compared in the test-suite and must agree coefficientwise.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from gmpy2 import mpq

from .series import ONE, ZERO, QSeries, UPoly

_cache_lock = threading.Lock()


def _memo(fn):
    cache: dict = {}

    @functools.wraps(fn)
    def wrapper(*args):
        args = tuple(_freeze(a) for a in args)
        key = args
        hit = cache.get(key)
        if hit is not None:
            return hit
        val = fn(*args)
        with _cache_lock:
            cache.setdefault(key, val)
        return cache[key]

    wrapper.cache = cache
    return wrapper


def _freeze(x):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    if isinstance(x, tuple):
        return tuple(_freeze(v) for v in x)
    return x


# ---------------------------------------------------------------------------
# indices and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BracketIndex:
    s: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        if any(x < 1 for x in self.s):
            raise ValueError(f"bracket entries must be >= 1, got {self.s}")

    @property
    def weight(self) -> int:
        return sum(self.s)

    @property
    def depth(self) -> int:
        return len(self.s)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.s)) + "]"


@dataclass(frozen=True, order=True)
class BiBracketIndex:
    s: tuple[int, ...] = ()
    r: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if len(self.s) != len(self.r):
            raise ValueError("bi-bracket rows must have equal length")
        if any(x < 1 for x in self.s) or any(x < 0 for x in self.r):
            raise ValueError(f"invalid bi-bracket index s={self.s} r={self.r}")

    @property
    def weight(self) -> int:
        return sum(self.s) + sum(self.r)

    @property
    def depth(self) -> int:
        return len(self.s)

    @property
    def in_qBD(self) -> bool:
        return not self.s or self.s[0] > 1

    @property
    def is_bracket(self) -> bool:
        return not any(self.r)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.s)) + ";" + ",".join(map(str, self.r)) + "]"


class FamilyTag(str, enum.Enum):
    MD = "MD"
    qMD = "qMD"
    BD = "BD"
    qBD = "qBD"
    qMZV = "qMZV"
    QM = "QM"

    def __str__(self) -> str:
        return self.value


# direct inclusions; the order relation is the transitive closure
_INCLUSIONS = {
    FamilyTag.QM: {FamilyTag.qMZV},
    FamilyTag.qMZV: {FamilyTag.qMD},
    FamilyTag.qMD: {FamilyTag.MD, FamilyTag.qBD},
    FamilyTag.MD: {FamilyTag.BD},
    FamilyTag.qBD: {FamilyTag.BD},
    FamilyTag.BD: set(),
}


def family_contains(big: FamilyTag, small: FamilyTag) -> bool:
    """True when ``small`` is a subalgebra of ``big``."""
    big, small = FamilyTag(big), FamilyTag(small)
    seen, todo = set(), [small]
    while todo:
        f = todo.pop()
        if f == big:
            return True
        if f not in seen:
            seen.add(f)
            todo.extend(_INCLUSIONS[f])
    return False


def compositions(total: int, minimum: int = 1) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of parts ``>= minimum`` summing to ``total``."""
    if total == 0:
        yield ()
        return
    for first in range(minimum, total + 1):
        for rest in compositions(total - first, minimum):
            yield (first,) + rest


def bibracket_indices(weight: int, qbd_only: bool = False) -> list[BiBracketIndex]:
    """All bi-bracket indices of exactly the given weight, deterministic order."""
    out = []
    for depth in range(0, weight + 1):
        if depth == 0:
            if weight == 0:
                out.append(BiBracketIndex())
            continue
        # each position carries s_i + r_i >= 1
        for blocks in compositions(weight):
            if len(blocks) != depth:
                continue
            for ss in itertools.product(*[range(b, 0, -1) for b in blocks]):
                idx = BiBracketIndex(ss, tuple(b - s for b, s in zip(blocks, ss)))
                if qbd_only and not idx.in_qBD:
                    continue
                out.append(idx)
    return out


def bracket_indices(weight: int, minimum: int = 1, q_only: bool = False) -> list[BracketIndex]:
    out = []
    for c in compositions(weight, minimum):
        if q_only and c and c[0] < 2:
            continue
        out.append(BracketIndex(c))
    out.sort(key=lambda b: (b.depth, tuple(-x for x in b.s)))
    return out


# ---------------------------------------------------------------------------
# Eulerian polynomials and Bernoulli numbers
# ---------------------------------------------------------------------------


def _power_sum_series(e: int, M: int) -> list:
    """Coefficients of ``sum_{d>=1} d^e t^d`` up to ``t^M``."""
    return [ZERO] + [mpq(d) ** e for d in range(1, M + 1)]


@functools.lru_cache(maxsize=None)
def eulerian_numerator(s: int) -> UPoly:
    """``t P_{s-1}(t)``, the numerator in ``t P_{s-1}(t)/(1-t)^s = sum d^(s-1) t^d``.

    Obtained by multiplying the power-sum series by ``(1-t)^s``; the product
    must terminate at degree ``s``, which is checked up to ``t^(2s+4)``.

    >>> eulerian_numerator(3)
    1*t + 1*t^2
    """
    if s < 1:
        raise ValueError("eulerian_numerator needs s >= 1")
    M = 2 * s + 4
    lhs = _power_sum_series(s - 1, M)
    binom = [mpq((-1) ** k * math.comb(s, k)) for k in range(s + 1)]
    prod = [ZERO] * (M + 1)
    for i, a in enumerate(lhs):
        if a:
            for k, b in enumerate(binom):
                if i + k <= M:
                    prod[i + k] += a * b
    if any(prod[s + 1:]):
        raise ArithmeticError(f"power-sum series for s={s} is not rational of the expected shape")
    return UPoly(prod[: s + 1])


@functools.lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple:
    # invert (e^t - 1)/t = sum t^k/(k+1)!
    f = [mpq(1, math.factorial(k + 1)) for k in range(n + 1)]
    g = [ONE] + [ZERO] * n
    for k in range(1, n + 1):
        g[k] = -sum(f[i] * g[k - i] for i in range(1, k + 1))
    return tuple(g[i] * math.factorial(i) for i in range(n + 1))


def bernoulli(i: int) -> mpq:
    """``B_i`` from ``t/(e^t - 1) = sum B_i t^i/i!`` (so ``B_1 = -1/2``)."""
    if i < 0:
        raise ValueError("Bernoulli index must be non-negative")
    return _bernoulli_table(max(i, 16))[i]


# ---------------------------------------------------------------------------
# chain sums
# ---------------------------------------------------------------------------

Kernel = Callable[[int, int], list]


def chain_sum(kernels: Sequence[Kernel], N: int) -> QSeries:
    """``sum_{n_1 > ... > n_l >= 1} prod_i K_i(n_i)`` truncated at ``q^N``.

    ``K_i(n, N)`` returns sparse ``[(k, c), ...]`` with all ``k >= n`` and
    ``k <= N``.  Processes ``n`` in increasing order, keeping partial sums of
    the innermost positions.
    """
    ell = len(kernels)
    if ell == 0:
        return QSeries.one(N)
    T = [[ONE] + [ZERO] * N] + [[ZERO] * (N + 1) for _ in range(ell)]
    for n in range(1, N + 1):
        for j in range(ell, 0, -1):
            prev = T[j - 1]
            # position ell - j is the one receiving the new largest value
            ker = kernels[ell - j](n, N)
            if not ker:
                continue
            tgt = T[j]
            for i, a in enumerate(prev):
                if not a:
                    continue
                for k, c in ker:
                    if i + k > N:
                        break
                    tgt[i + k] += a * c
    return QSeries._raw(tuple(T[ell]), N)


def _divisor_kernel(s: int, r: int) -> Kernel:
    """``(n^r/r!) sum_{d>=1} d^(s-1)/(s-1)! q^(n d)``."""
    norm = mpq(1, math.factorial(s - 1) * math.factorial(r))

    def ker(n: int, N: int):
        pre = mpq(n) ** r * norm
        return [(n * d, pre * mpq(d) ** (s - 1)) for d in range(1, N // n + 1)]

    return ker


def _rational_kernel(num: UPoly, s: int, scale) -> Callable[[int], Kernel]:
    """Kernel ``scale(n) * num(q^n) / (1 - q^n)^s``."""

    def ker_of(n: int, N: int):
        M = N // n
        c = scale(n)
        out = []
        for e in range(0, M + 1):
            acc = ZERO
            for k, a in enumerate(num.coeffs):
                if k > e:
                    break
                if a:
                    acc += a * math.comb(e - k + s - 1, s - 1)
            if acc:
                out.append((n * e, c * acc))
        return out

    return ker_of


@_memo
def bracket(idx, N: int) -> QSeries:
    """``[s_1, ..., s_l]`` truncated at ``q^N``; the empty bracket is 1.

    >>> bracket((2,), 6)
    q + 3*q^2 + 4*q^3 + 7*q^4 + 6*q^5 + 12*q^6 + O(q^7)
    """
    idx = idx if isinstance(idx, BracketIndex) else BracketIndex(tuple(idx))
    return bibracket(BiBracketIndex(idx.s, (0,) * idx.depth), N)


@_memo
def bibracket(idx, N: int) -> QSeries:
    """Bi-bracket by summing divisor kernels over strict chains."""
    idx = _as_bi(idx)
    return chain_sum([_divisor_kernel(s, r) for s, r in zip(idx.s, idx.r)], N)


@_memo
def bibracket_eulerian(idx, N: int) -> QSeries:
    """Bi-bracket through the Eulerian rational kernels."""
    idx = _as_bi(idx)
    kers = []
    for s, r in zip(idx.s, idx.r):
        norm = mpq(1, math.factorial(s - 1) * math.factorial(r))
        kers.append(_rational_kernel(eulerian_numerator(s), s, lambda n, r=r, norm=norm: mpq(n) ** r * norm))
    return chain_sum(kers, N)


def _as_bi(idx) -> BiBracketIndex:
    if isinstance(idx, BiBracketIndex):
        return idx
    if isinstance(idx, BracketIndex):
        return BiBracketIndex(idx.s, (0,) * idx.depth)
    s, r = idx
    return BiBracketIndex(tuple(s), tuple(r))


@functools.lru_cache(maxsize=None)
def q_odd_numerator(s: int) -> UPoly:
    """``Q^O_s(t)``: ``t^(s/2)`` for even ``s``, ``t^((s-1)/2)(1+t)`` for odd ``s``."""
    if s < 1:
        raise ValueError("s must be positive")
    if s % 2 == 0:
        return UPoly.monomial(s // 2)
    return UPoly.monomial((s - 1) // 2) * UPoly([1, 1])


@_memo
def zvalue(idx, N: int) -> QSeries:
    """Okounkov's ``Z(s_1, ..., s_l)`` with all ``s_i >= 2``."""
    idx = tuple(int(x) for x in idx)
    if any(s < 2 for s in idx):
        raise ValueError(f"Z-values need all entries >= 2, got {idx}")
    kers = [_rational_kernel(q_odd_numerator(s), s, lambda n: ONE) for s in idx]
    return chain_sum(kers, N)


@_memo
def divisor_sigma_series(k: int, N: int) -> QSeries:
    """``sum_{n>=1} sigma_k(n) q^n``."""
    cs = [ZERO] * (N + 1)
    for d in range(1, N + 1):
        p = mpq(d) ** k
        for m in range(d, N + 1, d):
            cs[m] += p
    return QSeries._raw(tuple(cs), N)


@_memo
def eisenstein(k2: int, N: int) -> QSeries:
    """``G_{2k} = (-B_{2k}/(4k) + sum sigma_{2k-1}(n) q^n) / (2k-1)!``."""
    if k2 < 2 or k2 % 2:
        raise ValueError(f"Eisenstein weight must be even and >= 2, got {k2}")
    k = k2 // 2
    const = -bernoulli(k2) / (4 * k)
    return (divisor_sigma_series(k2 - 1, N) + const).scale(mpq(1, math.factorial(k2 - 1)))


__all__ = [
    "BracketIndex", "BiBracketIndex", "FamilyTag", "family_contains", "compositions",
    "bibracket_indices", "bracket_indices", "eulerian_numerator", "bernoulli", "chain_sum",
    "bracket", "bibracket", "bibracket_eulerian", "q_odd_numerator", "zvalue",
    "divisor_sigma_series", "eisenstein",
]
