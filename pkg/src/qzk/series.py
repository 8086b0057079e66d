"""Exact truncated series.

Three layers, all over exact rationals (``gmpy2.mpq``):

* :class:`QSeries` -- dense power series in ``q`` truncated at order ``N``.
* :class:`YLayer` -- Laurent polynomial in the ``y`` variables whose
  coefficients are q-series; exponents are bounded by ``Y``.
* :class:`RingElement` -- polynomial in formal variables (``z``, ``w``, ``a``,
  ...) of total degree at most ``D`` with coefficients in the ``y`` layer.

Truncation is never silent: products that drop a ``y`` exponent outside
``[-Y, Y]`` set ``saturated`` and products that drop a monomial above the
degree bound set ``degree_truncated``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Rational = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)


def as_rational(x) -> Rational:
    """Coerce ints, ``Fraction``, ``mpq`` or ``"p/q"`` strings to ``mpq``."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return mpq(x.strip())
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(int(x.numerator), int(x.denominator))
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return mpq(x)


def rational_str(x) -> str:
    return str(as_rational(x))


# ---------------------------------------------------------------------------
# q-series
# ---------------------------------------------------------------------------


class QSeries:
    """Power series ``sum c_k q^k`` known exactly for ``k <= N``."""

    __slots__ = ("N", "coeffs", "_nz")

    def __init__(self, coeffs: Iterable = (), N: int | None = None):
        cs = [as_rational(c) for c in coeffs]
        if N is None:
            N = max(len(cs) - 1, 0)
        if N < 0:
            raise ValueError("truncation order must be non-negative")
        if len(cs) > N + 1:
            cs = cs[: N + 1]
        else:
            cs.extend([ZERO] * (N + 1 - len(cs)))
        self.N = N
        self.coeffs = tuple(cs)
        self._nz = None

    @classmethod
    def _raw(cls, coeffs: tuple, N: int) -> "QSeries":
        s = cls.__new__(cls)
        s.N = N
        s.coeffs = coeffs
        s._nz = None
        return s

    @classmethod
    def zero(cls, N: int) -> "QSeries":
        return cls._raw((ZERO,) * (N + 1), N)

    @classmethod
    def one(cls, N: int) -> "QSeries":
        return cls.monomial(0, ONE, N)

    @classmethod
    def monomial(cls, k: int, c, N: int) -> "QSeries":
        cs = [ZERO] * (N + 1)
        if 0 <= k <= N:
            cs[k] = as_rational(c)
        return cls._raw(tuple(cs), N)

    @classmethod
    def from_dict(cls, d: Mapping[int, object], N: int) -> "QSeries":
        cs = [ZERO] * (N + 1)
        for k, c in d.items():
            if 0 <= k <= N:
                cs[k] += as_rational(c)
        return cls._raw(tuple(cs), N)

    # -- inspection ---------------------------------------------------------

    @property
    def nonzero(self) -> list[tuple[int, Rational]]:
        if self._nz is None:
            self._nz = [(i, c) for i, c in enumerate(self.coeffs) if c]
        return self._nz

    def is_zero(self) -> bool:
        return not self.nonzero

    def valuation(self) -> int | None:
        nz = self.nonzero
        return nz[0][0] if nz else None

    def __getitem__(self, k: int) -> Rational:
        return self.coeffs[k]

    def __len__(self) -> int:
        return self.N + 1

    def __eq__(self, other) -> bool:
        if isinstance(other, QSeries):
            return self.N == other.N and self.coeffs == other.coeffs
        if isinstance(other, (int, Rational)):
            return self == QSeries.monomial(0, other, self.N)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.N, self.coeffs))

    def agrees_with(self, other: "QSeries") -> bool:
        """Coefficientwise equality up to the smaller of the two orders."""
        n = min(self.N, other.N)
        return self.coeffs[: n + 1] == other.coeffs[: n + 1]

    def truncate(self, N: int) -> "QSeries":
        if N > self.N:
            raise ValueError(f"cannot extend a series known to order {self.N} to {N}")
        if N == self.N:
            return self
        return QSeries._raw(self.coeffs[: N + 1], N)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Rational)):
            other = QSeries.monomial(0, other, self.N)
        if not isinstance(other, QSeries):
            return NotImplemented
        N = min(self.N, other.N)
        return QSeries._raw(tuple(a + b for a, b in zip(self.coeffs[: N + 1], other.coeffs)), N)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw(tuple(-c for c in self.coeffs), self.N)

    def __sub__(self, other):
        if isinstance(other, (int, Rational)):
            other = QSeries.monomial(0, other, self.N)
        if not isinstance(other, QSeries):
            return NotImplemented
        N = min(self.N, other.N)
        return QSeries._raw(tuple(a - b for a, b in zip(self.coeffs[: N + 1], other.coeffs)), N)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        c = as_rational(c)
        if not c:
            return QSeries.zero(self.N)
        return QSeries._raw(tuple(c * x for x in self.coeffs), self.N)

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        N = min(self.N, other.N)
        acc = [ZERO] * (N + 1)
        nzb = other.nonzero
        for i, a in self.nonzero:
            if i > N:
                break
            lim = N - i
            for j, b in nzb:
                if j > lim:
                    break
                acc[i + j] += a * b
        return QSeries._raw(tuple(acc), N)

    def __rmul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "QSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = QSeries.one(self.N)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, k: int) -> "QSeries":
        """Multiply by ``q^k`` (``k >= 0``)."""
        if k < 0:
            raise ValueError("negative shift")
        cs = ((ZERO,) * k + self.coeffs)[: self.N + 1]
        return QSeries._raw(cs, self.N)

    def inverse(self) -> "QSeries":
        c0 = self.coeffs[0]
        if not c0:
            raise ZeroDivisionError("q-series with zero constant term is not a unit")
        N = self.N
        inv0 = 1 / c0
        out = [inv0] + [ZERO] * N
        nz = [(i, c) for i, c in self.nonzero if i > 0]
        for k in range(1, N + 1):
            s = ZERO
            for i, c in nz:
                if i > k:
                    break
                s += c * out[k - i]
            out[k] = -s * inv0
        return QSeries._raw(tuple(out), N)

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(1 / as_rational(other))
        if isinstance(other, QSeries):
            return self * other.inverse()
        return NotImplemented

    # -- presentation -------------------------------------------------------

    def to_json(self) -> dict:
        return {"N": self.N, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, d: Mapping) -> "QSeries":
        return cls([as_rational(c) for c in d["coeffs"]], int(d["N"]))

    def __repr__(self) -> str:
        parts = []
        for k, c in self.nonzero:
            mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        return f"{body} + O(q^{self.N + 1})"


def qs_arith(a: QSeries, b, op: str) -> QSeries:
    """Dispatch ``add``/``sub``/``mul``/``scale``; ``b`` is a scalar for ``scale``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown q-series operation {op!r}")


def qs_geometric(d: int, c: int, N: int) -> QSeries:
    """``sum_{n >= c} q^(n d)`` truncated at ``q^N``."""
    if d < 1:
        raise ValueError("geometric step d must be positive")
    if c < 0:
        raise ValueError("start index c must be non-negative")
    cs = [ZERO] * (N + 1)
    for k in range(c * d, N + 1, d):
        cs[k] = ONE
    return QSeries._raw(tuple(cs), N)


# ---------------------------------------------------------------------------
# univariate polynomials over Q
# ---------------------------------------------------------------------------


class UPoly:
    """Dense univariate polynomial, coefficients listed from degree 0 upward."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "UPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "UPoly") -> "UPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (n - len(other.coeffs))
        return UPoly(x + y for x, y in zip(a, b))

    def __neg__(self) -> "UPoly":
        return UPoly(-c for c in self.coeffs)

    def __sub__(self, other: "UPoly") -> "UPoly":
        return self + (-other)

    def __mul__(self, other) -> "UPoly":
        if not isinstance(other, UPoly):
            c = as_rational(other)
            return UPoly(c * x for x in self.coeffs)
        if self.is_zero() or other.is_zero():
            return UPoly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "UPoly":
        out = UPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: "UPoly") -> "UPoly":
        acc = UPoly()
        for c in reversed(self.coeffs):
            acc = acc * inner + UPoly([c])
        return acc

    def shift(self, k) -> "UPoly":
        """The polynomial ``x -> p(x + k)``."""
        return self.compose(UPoly([k, 1]))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ") or "0"


# ---------------------------------------------------------------------------
# monomial keys
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


def parse_monomial(text: str, names: Sequence[str], allow_negative: bool = False) -> tuple[int, ...]:
    """Parse ``"z1^2*w1"`` into an exponent tuple over ``names``; ``"1"`` is the unit."""
    exps = [0] * len(names)
    text = text.strip()
    if text in ("", "1"):
        return tuple(exps)
    index = {n: i for i, n in enumerate(names)}
    for tok in text.split("*"):
        m = _TOKEN.match(tok.strip())
        if not m:
            raise ValueError(f"malformed monomial factor {tok!r}")
        name, e = m.group(1), int(m.group(2) or 1)
        if name not in index:
            raise ValueError(f"unknown variable {name!r} (declared: {', '.join(names)})")
        if e < 0 and not allow_negative:
            raise ValueError(f"negative exponent on formal variable {name!r}")
        exps[index[name]] += e
    return tuple(exps)


def format_monomial(exps: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for n, e in zip(names, exps):
        if e == 1:
            parts.append(n)
        elif e:
            parts.append(f"{n}^{e}")
    return "*".join(parts) if parts else "1"


def _monomial_sort_key(exps: tuple[int, ...]):
    return (sum(abs(e) for e in exps), tuple(-e for e in exps))


# ---------------------------------------------------------------------------
# y layer
# ---------------------------------------------------------------------------


@dataclass
class YLayer:
    """Bounded multi-Laurent polynomial in ``y_vars`` with q-series coefficients."""

    y_vars: tuple[str, ...]
    Y: int
    N: int
    terms: dict[tuple[int, ...], QSeries] = field(default_factory=dict)
    saturated: bool = False

    def __post_init__(self):
        self.terms = {k: v for k, v in self.terms.items() if not v.is_zero()}
        for k in self.terms:
            if len(k) != len(self.y_vars) or any(abs(e) > self.Y for e in k):
                raise ValueError(f"y-exponent {k} outside bound {self.Y}")

    def y0_part(self) -> QSeries:
        return self.terms.get((0,) * len(self.y_vars), QSeries.zero(self.N))

    def __eq__(self, other) -> bool:
        if not isinstance(other, YLayer):
            return NotImplemented
        return (self.y_vars, self.Y, self.N, self.terms) == (other.y_vars, other.Y, other.N, other.terms)

    def __add__(self, other: "YLayer") -> "YLayer":
        self._check(other)
        N = min(self.N, other.N)
        out = {k: v.truncate(N) for k, v in self.terms.items()}
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v.truncate(N)
        return YLayer(self.y_vars, self.Y, N, out, self.saturated or other.saturated)

    def __mul__(self, other: "YLayer") -> "YLayer":
        self._check(other)
        N = min(self.N, other.N)
        out: dict[tuple[int, ...], QSeries] = {}
        sat = self.saturated or other.saturated
        for ka, a in self.terms.items():
            for kb, b in other.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                if any(abs(e) > self.Y for e in k):
                    sat = True
                    continue
                p = a * b
                out[k] = out[k] + p if k in out else p.truncate(N)
        return YLayer(self.y_vars, self.Y, N, out, sat)

    def _check(self, other: "YLayer") -> None:
        if self.y_vars != other.y_vars or self.Y != other.Y:
            raise ValueError("y layers over different variables or bounds")

    def to_json(self) -> dict:
        return {format_monomial(k, self.y_vars): v.to_json() for k, v in sorted(self.terms.items(), key=lambda kv: _monomial_sort_key(kv[0]))}


def y0_part(layer: YLayer) -> QSeries:
    return layer.y0_part()


# ---------------------------------------------------------------------------
# ring of formal variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ring:
    """Variable declarations plus the truncation triple ``(N, D, Y)``.

    Variables listed in ``ungraded`` (the exponents ``a``, ``b``) do not count
    towards the degree bound of the graded variables; their own total degree is
    bounded by ``D`` separately.
    """

    formal_vars: tuple[str, ...] = ()
    y_vars: tuple[str, ...] = ()
    N: int = 20
    D: int = 4
    Y: int | None = None
    ungraded: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "formal_vars", tuple(self.formal_vars))
        object.__setattr__(self, "y_vars", tuple(self.y_vars))
        object.__setattr__(self, "ungraded", frozenset(self.ungraded))
        if self.Y is None:
            object.__setattr__(self, "Y", self.N)
        if min(self.N, self.D, self.Y) < 0:
            raise ValueError("truncation bounds must be non-negative")
        if len(set(self.formal_vars)) != len(self.formal_vars) or len(set(self.y_vars)) != len(self.y_vars):
            raise ValueError("duplicate variable names")
        if set(self.formal_vars) & set(self.y_vars):
            raise ValueError("a name cannot be both formal and y variable")
        if not self.ungraded <= set(self.formal_vars):
            raise ValueError("ungraded variables must be declared formal variables")

    @property
    def graded_mask(self) -> tuple[bool, ...]:
        return tuple(v not in self.ungraded for v in self.formal_vars)

    def degree(self, exps: Sequence[int]) -> int:
        return sum(e for e, g in zip(exps, self.graded_mask) if g)

    def ungraded_degree(self, exps: Sequence[int]) -> int:
        return sum(e for e, g in zip(exps, self.graded_mask) if not g)

    def union(self, other: "Ring") -> "Ring":
        if self == other:
            return self
        fv = self.formal_vars + tuple(v for v in other.formal_vars if v not in self.formal_vars)
        yv = self.y_vars + tuple(v for v in other.y_vars if v not in self.y_vars)
        for v in set(self.formal_vars) & set(other.formal_vars):
            if (v in self.ungraded) != (v in other.ungraded):
                raise ValueError(f"variable {v!r} declared with conflicting grading")
        return Ring(fv, yv, min(self.N, other.N), min(self.D, other.D), min(self.Y, other.Y), self.ungraded | other.ungraded)

    def with_bounds(self, N=None, D=None, Y=None) -> "Ring":
        return Ring(self.formal_vars, self.y_vars, self.N if N is None else N, self.D if D is None else D,
                    self.Y if Y is None else Y, self.ungraded)

    # factories
    def zero(self) -> "RingElement":
        return RingElement(self, {})

    def one(self) -> "RingElement":
        return self.constant(1)

    def constant(self, c) -> "RingElement":
        s = c if isinstance(c, QSeries) else QSeries.monomial(0, c, self.N)
        return RingElement(self, {(self._zf, self._zy): s.truncate(min(s.N, self.N)) if s.N >= self.N else s})

    def var(self, name: str, power: int = 1) -> "RingElement":
        return self.monomial({name: power})

    def monomial(self, formal: Mapping[str, int] | None = None, y: Mapping[str, int] | None = None,
                 coeff=1) -> "RingElement":
        f = [0] * len(self.formal_vars)
        for name, e in (formal or {}).items():
            f[self.formal_vars.index(name)] += e
        yy = [0] * len(self.y_vars)
        for name, e in (y or {}).items():
            yy[self.y_vars.index(name)] += e
        s = coeff if isinstance(coeff, QSeries) else QSeries.monomial(0, coeff, self.N)
        return RingElement(self, {(tuple(f), tuple(yy)): s})

    @property
    def _zf(self) -> tuple[int, ...]:
        return (0,) * len(self.formal_vars)

    @property
    def _zy(self) -> tuple[int, ...]:
        return (0,) * len(self.y_vars)


LinearForm = Mapping[str, int]


class RingElement:
    """Element of ``Q[[q]][y, 1/y][formal vars]`` under the ring's truncations.

    Stored flat: ``(formal exponents, y exponents) -> QSeries``.  Use
    :attr:`terms` for the nested ``formal -> YLayer`` view.
    """

    __slots__ = ("ring", "_t", "saturated", "degree_truncated")

    def __init__(self, ring: Ring, terms: Mapping[tuple, QSeries], saturated: bool = False,
                 degree_truncated: bool = False):
        self.ring = ring
        t = {}
        for (f, y), s in terms.items():
            if s.is_zero():
                continue
            if len(f) != len(ring.formal_vars) or len(y) != len(ring.y_vars):
                raise ValueError("exponent vector does not match declared variables")
            if ring.degree(f) > ring.D or ring.ungraded_degree(f) > ring.D:
                raise ValueError(f"monomial {format_monomial(f, ring.formal_vars)} exceeds degree bound {ring.D}")
            if any(abs(e) > ring.Y for e in y):
                raise ValueError(f"y-exponent {y} exceeds bound {ring.Y}")
            if s.N < ring.N:
                raise ValueError("coefficient known to lower q-order than the ring")
            t[(f, y)] = s if s.N == ring.N else s.truncate(ring.N)
        self._t = t
        self.saturated = saturated
        self.degree_truncated = degree_truncated

    @classmethod
    def _raw(cls, ring: Ring, t: dict, saturated=False, degree_truncated=False) -> "RingElement":
        e = cls.__new__(cls)
        e.ring = ring
        e._t = t
        e.saturated = saturated
        e.degree_truncated = degree_truncated
        return e

    # -- views ---------------------------------------------------------------

    @property
    def N(self) -> int:
        return self.ring.N

    @property
    def D(self) -> int:
        return self.ring.D

    @property
    def Y(self) -> int:
        return self.ring.Y

    @property
    def formal_vars(self) -> tuple[str, ...]:
        return self.ring.formal_vars

    @property
    def y_vars(self) -> tuple[str, ...]:
        return self.ring.y_vars

    def items(self):
        return self._t.items()

    def __len__(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    @property
    def terms(self) -> dict[tuple[int, ...], YLayer]:
        nested: dict[tuple[int, ...], dict] = {}
        for (f, y), s in self._t.items():
            nested.setdefault(f, {})[y] = s
        r = self.ring
        return {f: YLayer(r.y_vars, r.Y, r.N, d, self.saturated) for f, d in nested.items()}

    def monomials(self) -> list[tuple[int, ...]]:
        return sorted({f for f, _ in self._t}, key=_monomial_sort_key)

    def coefficient(self, monomial) -> YLayer:
        r = self.ring
        if isinstance(monomial, str):
            f = parse_monomial(monomial, r.formal_vars)
        elif isinstance(monomial, Mapping):
            f = [0] * len(r.formal_vars)
            for k, e in monomial.items():
                f[r.formal_vars.index(k)] = e
            f = tuple(f)
        else:
            f = tuple(monomial)
        if r.degree(f) > r.D or r.ungraded_degree(f) > r.D:
            raise ValueError("monomial lies beyond the degree bound")
        d = {y: s for (ff, y), s in self._t.items() if ff == f}
        return YLayer(r.y_vars, r.Y, r.N, d, self.saturated)

    def series(self, monomial="1") -> QSeries:
        """The y-free q-series coefficient of ``monomial`` (requires no y variables)."""
        if self.ring.y_vars:
            raise ValueError("element still carries y variables; take a y-coefficient first")
        return self.coefficient(monomial).y0_part()

    def y0(self) -> "RingElement":
        """Terms with all-zero y exponent, as an element without y variables."""
        r = self.ring
        zy = r._zy
        ring0 = Ring(r.formal_vars, (), r.N, r.D, r.Y, r.ungraded)
        return RingElement._raw(ring0, {(f, ()): s for (f, y), s in self._t.items() if y == zy},
                                False, self.degree_truncated)

    # -- structure -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.ring == other.ring and self._t == other._t

    def __hash__(self):
        raise TypeError("RingElement is not hashable")

    def coerce(self, ring: Ring) -> "RingElement":
        """Re-express over a ring with a superset of variables and smaller-or-equal bounds."""
        r = self.ring
        if ring == r:
            return self
        fmap = [ring.formal_vars.index(v) for v in r.formal_vars]
        ymap = [ring.y_vars.index(v) for v in r.y_vars]
        t = {}
        sat, trunc = self.saturated, self.degree_truncated
        nf, ny = len(ring.formal_vars), len(ring.y_vars)
        for (f, y), s in self._t.items():
            ff = [0] * nf
            for i, e in zip(fmap, f):
                ff[i] = e
            yy = [0] * ny
            for i, e in zip(ymap, y):
                yy[i] = e
            ff, yy = tuple(ff), tuple(yy)
            if ring.degree(ff) > ring.D or ring.ungraded_degree(ff) > ring.D:
                trunc = True
                continue
            if any(abs(e) > ring.Y for e in yy):
                sat = True
                continue
            s = s.truncate(ring.N)
            if not s.is_zero():
                t[(ff, yy)] = s
        return RingElement._raw(ring, t, sat, trunc)

    def _align(self, other: "RingElement"):
        if self.ring == other.ring:
            return self, other
        ring = self.ring.union(other.ring)
        return self.coerce(ring), other.coerce(ring)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Rational, QSeries)):
            other = self.ring.constant(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        a, b = self._align(other)
        t = dict(a._t)
        for k, s in b._t.items():
            if k in t:
                v = t[k] + s
                if v.is_zero():
                    del t[k]
                else:
                    t[k] = v
            else:
                t[k] = s
        return RingElement._raw(a.ring, t, a.saturated or b.saturated, a.degree_truncated or b.degree_truncated)

    __radd__ = __add__

    def __neg__(self):
        return RingElement._raw(self.ring, {k: -s for k, s in self._t.items()}, self.saturated, self.degree_truncated)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "RingElement":
        if isinstance(c, QSeries):
            t = {}
            for k, s in self._t.items():
                v = s * c
                if not v.is_zero():
                    t[k] = v
            ring = self.ring if c.N >= self.ring.N else self.ring.with_bounds(N=c.N)
            return RingElement._raw(ring, t, self.saturated, self.degree_truncated)
        c = as_rational(c)
        if not c:
            return RingElement._raw(self.ring, {}, self.saturated, self.degree_truncated)
        return RingElement._raw(self.ring, {k: s.scale(c) for k, s in self._t.items()},
                                self.saturated, self.degree_truncated)

    def __mul__(self, other):
        if isinstance(other, (int, Rational, QSeries)):
            return self.scale(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return ring_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Rational, QSeries)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "RingElement":
        if k < 0:
            raise ValueError("use inverse() for negative powers")
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def constant_term(self) -> QSeries:
        r = self.ring
        return self._t.get((r._zf, r._zy), QSeries.zero(r.N))

    def inverse(self) -> "RingElement":
        """Inverse of a unit ``c (1 - u)`` with ``u`` topologically nilpotent."""
        c = self.constant_term()
        if c.is_zero() or not c[0]:
            raise ZeroDivisionError("element has zero constant term")
        c_inv = c.inverse()
        one = self.ring.one()
        u = one - self.scale(c_inv)
        _check_nilpotent(u)
        out, power = one, one
        for _ in range(_nilpotency_cap(self.ring)):
            power = power * u
            if power.is_zero():
                return out.scale(c_inv)
            out = out + power
        raise ArithmeticError("inverse series did not terminate under the truncation bounds")

    # -- substitution ---------------------------------------------------------

    def specialize_zero(self, names: Iterable[str]) -> "RingElement":
        """Set the named formal variables to zero and drop them from the ring."""
        names = set(names)
        r = self.ring
        keep = [i for i, v in enumerate(r.formal_vars) if v not in names]
        drop = [i for i, v in enumerate(r.formal_vars) if v in names]
        ring = Ring(tuple(r.formal_vars[i] for i in keep), r.y_vars, r.N, r.D, r.Y,
                    r.ungraded - names)
        t = {}
        for (f, y), s in self._t.items():
            if any(f[i] for i in drop):
                continue
            t[(tuple(f[i] for i in keep), y)] = s
        return RingElement._raw(ring, t, self.saturated, self.degree_truncated)

    def prune_vars(self) -> "RingElement":
        """Drop declared formal/y variables that occur in no stored term."""
        r = self.ring
        used_f = [i for i in range(len(r.formal_vars)) if any(f[i] for f, _ in self._t)]
        used_y = [i for i in range(len(r.y_vars)) if any(y[i] for _, y in self._t)]
        fv = tuple(r.formal_vars[i] for i in used_f)
        ring = Ring(fv, tuple(r.y_vars[i] for i in used_y), r.N, r.D, r.Y, r.ungraded & set(fv))
        t = {(tuple(f[i] for i in used_f), tuple(y[i] for i in used_y)): s for (f, y), s in self._t.items()}
        return RingElement._raw(ring, t, self.saturated, self.degree_truncated)

    # -- serialisation ----------------------------------------------------------

    def to_json(self) -> dict:
        r = self.ring
        nested: dict[tuple, dict] = {}
        for (f, y), s in self._t.items():
            nested.setdefault(f, {})[y] = s
        terms = {}
        for f in sorted(nested, key=_monomial_sort_key):
            ys = nested[f]
            terms[format_monomial(f, r.formal_vars)] = {
                format_monomial(y, r.y_vars): ys[y].to_json() for y in sorted(ys, key=_monomial_sort_key)
            }
        return {
            "formal_vars": list(r.formal_vars),
            "y_vars": list(r.y_vars),
            "ungraded": sorted(r.ungraded),
            "N": r.N,
            "D": r.D,
            "Y": r.Y,
            "saturated": self.saturated,
            "degree_truncated": self.degree_truncated,
            "terms": terms,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "RingElement":
        ring = Ring(tuple(d["formal_vars"]), tuple(d["y_vars"]), int(d["N"]), int(d["D"]), int(d["Y"]),
                    frozenset(d.get("ungraded", ())))
        t = {}
        for fk, ys in d["terms"].items():
            f = parse_monomial(fk, ring.formal_vars)
            for yk, s in ys.items():
                t[(f, parse_monomial(yk, ring.y_vars, allow_negative=True))] = QSeries.from_json(s)
        return cls(ring, t, bool(d.get("saturated", False)), bool(d.get("degree_truncated", False)))

    def __repr__(self) -> str:
        r = self.ring
        lines = []
        for (f, y), s in sorted(self._t.items(), key=lambda kv: (_monomial_sort_key(kv[0][0]), kv[0][1])):
            mono = format_monomial(f, r.formal_vars)
            ym = format_monomial(y, r.y_vars)
            lines.append(f"  [{mono}]" + ("" if ym == "1" else f" {ym}") + f": {s!r}")
        head = f"RingElement(vars={list(r.formal_vars)}, y={list(r.y_vars)}, N={r.N}, D={r.D}, Y={r.Y})"
        return head + ("\n" + "\n".join(lines) if lines else " = 0")


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    """Truncated product; drops beyond ``D``/``Y``/``N`` are recorded as flags."""
    a, b = a._align(b)
    ring = a.ring
    N, D, Y = ring.N, ring.D, ring.Y
    mask = ring.graded_mask
    sat = a.saturated or b.saturated
    trunc = a.degree_truncated or b.degree_truncated

    def prep(t):
        out = []
        for (f, y), s in t.items():
            dg = sum(e for e, g in zip(f, mask) if g)
            du = sum(f) - dg
            out.append((f, y, dg, du, s.nonzero))
        return out

    pa, pb = prep(a._t), prep(b._t)
    if len(pa) > len(pb):
        pa, pb = pb, pa
    pb.sort(key=lambda e: e[2])
    acc: dict[tuple, list] = {}
    for fa, ya, dga, dua, nza in pa:
        va = nza[0][0]
        for fb, yb, dgb, dub, nzb in pb:
            if dga + dgb > D:
                trunc = True
                break
            if dua + dub > D:
                trunc = True
                continue
            if va + nzb[0][0] > N:
                continue
            if ya:
                y = tuple([p + r for p, r in zip(ya, yb)])
                if max(y) > Y or min(y) < -Y:
                    sat = True
                    continue
            else:
                y = ya
            f = tuple([p + r for p, r in zip(fa, fb)])
            key = (f, y)
            row = acc.get(key)
            if row is None:
                row = [ZERO] * (N + 1)
                acc[key] = row
            for i, ci in nza:
                lim = N - i
                if lim < 0:
                    break
                for j, cj in nzb:
                    if j > lim:
                        break
                    row[i + j] += ci * cj
    t = {}
    for key, row in acc.items():
        if any(row):
            t[key] = QSeries._raw(tuple(row), N)
    return RingElement._raw(ring, t, sat, trunc)


# ---------------------------------------------------------------------------
# exponential, Bell polynomials, coefficient extraction
# ---------------------------------------------------------------------------


def _nilpotency_cap(ring: Ring) -> int:
    return 2 * ring.D + ring.N + 1


def _check_nilpotent(p: RingElement) -> None:
    r = p.ring
    for (f, y), s in p._t.items():
        if sum(f) == 0 and s.coeffs[0]:
            if any(y):
                raise ValueError(
                    f"term {format_monomial(y, r.y_vars)} has degree 0 and q-order 0; "
                    "its powers do not terminate (supply this factor by direct product construction)")
            raise ValueError("element has a nonzero constant term")


def exp_truncated(p: RingElement) -> RingElement:
    """``sum_k p^k / k!`` under the truncation of ``p``'s ring.

    Every term of ``p`` must carry a formal variable or a positive power of
    ``q``; otherwise the exponential would need a transcendental constant or
    would not terminate.
    """
    _check_nilpotent(p)
    out = p.ring.one()
    term = out
    out = RingElement._raw(out.ring, dict(out._t), p.saturated, p.degree_truncated)
    for k in range(1, _nilpotency_cap(p.ring) + 1):
        term = (term * p).scale(mpq(1, k))
        if term.is_zero():
            out.saturated |= term.saturated
            out.degree_truncated |= term.degree_truncated
            return out
        out = out + term
    raise ArithmeticError("exponential series did not terminate")  # pragma: no cover


def integer_partitions(m: int, largest: int | None = None):
    """Partitions of ``m`` as multiplicity maps ``{part: count}``."""
    if largest is None:
        largest = m
    if m == 0:
        yield {}
        return
    for part in range(min(m, largest), 0, -1):
        for rest in integer_partitions(m - part, part):
            out = dict(rest)
            out[part] = out.get(part, 0) + 1
            yield out


def bell_coefficient(f_derivs: Sequence, m: int):
    """Coefficient of ``z^m`` in ``exp(f(z))`` from the derivatives of ``f`` at 0.

    ``f_derivs[t - 1]`` holds the ``t``-th derivative ``D^t f`` (``t = 1..m``).
    Returns ``sum over k_1 + 2 k_2 + ... = m`` of
    ``prod_t (f_t / t!)^{k_t} / k_t!``.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if len(f_derivs) < m:
        raise ValueError(f"need {m} derivatives, got {len(f_derivs)}")
    total = None
    for part in integer_partitions(m):
        term = None
        denom = 1
        for t, k in part.items():
            base = f_derivs[t - 1] * mpq(1, math.factorial(t))
            for _ in range(k):
                term = base if term is None else term * base
            denom *= math.factorial(k)
        term = term * mpq(1, denom)
        total = term if total is None else total + term
    return total


def coeff_extract(p: RingElement, monomial) -> YLayer:
    return p.coefficient(monomial)


# ---------------------------------------------------------------------------
# exponentials of linear forms
# ---------------------------------------------------------------------------


def exp_linear(ring: Ring, L: LinearForm, scale: int = 1) -> RingElement:
    """``exp(scale * L)`` for an integer linear form ``L`` in the formal variables."""
    factors = []
    for name, c in L.items():
        if not c:
            continue
        i = ring.formal_vars.index(name)
        factors.append((i, scale * c, name in ring.ungraded))
    nf = len(ring.formal_vars)
    zero_y = ring._zy
    one = QSeries.one(ring.N)
    t = {((0,) * nf, zero_y): one}
    for i, c, ungraded in factors:
        new = {}
        for (f, y), s in t.items():
            dg, du = ring.degree(f), ring.ungraded_degree(f)
            room = ring.D - (du if ungraded else dg)
            for k in range(room + 1):
                ff = list(f)
                ff[i] += k
                coef = mpq(c) ** k / math.factorial(k)
                key = (tuple(ff), y)
                new[key] = s.scale(coef) if key not in new else new[key] + s.scale(coef)
        t = new
    return RingElement._raw(ring, t)


__all__ = [
    "Rational", "ZERO", "ONE", "as_rational", "rational_str", "QSeries", "qs_arith", "qs_geometric",
    "UPoly", "YLayer", "y0_part", "Ring", "RingElement", "LinearForm", "ring_mul", "exp_truncated",
    "bell_coefficient", "coeff_extract", "exp_linear", "integer_partitions", "parse_monomial",
    "format_monomial",
]
