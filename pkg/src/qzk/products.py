"""Infinite q-Pochhammer products expanded in formal variables.

A factor ``(e^L y^e q^c; q)_inf`` is described by a :class:`PochFactor`.
Products are built either by multiplying the binomials
``1 - e^L y^e q^(c+n)`` directly or as ``exp`` of summed logarithms

    log (u q^c; q)_inf = - sum_{d>=1} (1/d) u^d q^(c d) / (1 - q^d).

Factors raised to a formal power (the exponents ``a``, ``b``) always go
through the logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .series import (QSeries, Ring, RingElement, _check_nilpotent, exp_linear, exp_truncated)


class BudgetExceeded(RuntimeError):
    """Raised when a construction would exceed the configured term budget."""


def _frozen_map(m) -> tuple[tuple[str, int], ...]:
    if m is None:
        return ()
    items = m.items() if isinstance(m, Mapping) else m
    return tuple(sorted((str(k), int(v)) for k, v in items if v))


@dataclass(frozen=True)
class PochFactor:
    """``(e^L * y^y_exp * q^c; q)_inf ** power``.

    ``power`` is a non-zero integer or the name of a formal variable,
    optionally prefixed by ``-`` (e.g. ``"a"``, ``"-b"``).
    """

    L: tuple[tuple[str, int], ...] = ()
    y_exp: tuple[tuple[str, int], ...] = ()
    c: int = 1
    power: int | str = 1

    def __post_init__(self):
        object.__setattr__(self, "L", _frozen_map(self.L))
        object.__setattr__(self, "y_exp", _frozen_map(self.y_exp))
        if self.c < 0:
            raise ValueError("q-shift c must be non-negative")
        if self.c == 0 and not self.y_exp:
            raise ValueError("(e^L; q)_inf with c = 0 and no y-variable has the non-unit factor 1 - e^L")
        if isinstance(self.power, str):
            if not self.power.lstrip("-"):
                raise ValueError("empty formal power")
        elif self.power == 0:
            raise ValueError("power 0 factors should be omitted")

    @property
    def formal_power(self) -> tuple[int, str] | None:
        if isinstance(self.power, str):
            return (-1, self.power[1:]) if self.power.startswith("-") else (1, self.power)
        return None

    def y_vector(self, ring: Ring) -> tuple[int, ...]:
        v = [0] * len(ring.y_vars)
        for name, e in self.y_exp:
            v[ring.y_vars.index(name)] = e
        return tuple(v)


def _y_step(yv: tuple[int, ...]) -> int:
    return max((abs(e) for e in yv), default=0)


def poch_log(f: PochFactor, ring: Ring) -> RingElement:
    """Truncated ``log (e^L y^e q^c; q)_inf`` (the power field is ignored)."""
    yv = f.y_vector(ring)
    step = _y_step(yv)
    N, Y = ring.N, ring.Y
    saturated = False
    if f.c >= 1:
        dmax = N // f.c
        if step:
            if dmax * step > Y:
                saturated = True
            dmax = min(dmax, Y // step)
    else:
        dmax = Y // step
        saturated = True  # the y-tail beyond Y is dropped
    out = ring.zero()
    L = dict(f.L)
    for d in range(1, dmax + 1):
        geo = {n * d: 1 for n in range(f.c, N // d + 1)}
        if not geo:
            continue
        s = QSeries.from_dict(geo, N).scale(mpq(-1, d))
        e = exp_linear(ring, L, d) if L else ring.one()
        y = tuple(d * x for x in yv)
        term = RingElement._raw(ring, {(fe, y): cs * s for (fe, _), cs in e.items()})
        out = out + term
    out.saturated = saturated
    return out


def _binomial(ring: Ring, L: Mapping[str, int], yv: tuple[int, ...], m: int, inverse: bool) -> RingElement:
    """``1 - e^L y^yv q^m`` or its inverse ``sum_k e^(kL) y^(k yv) q^(mk)``."""
    N, Y = ring.N, ring.Y
    if not inverse:
        e = exp_linear(ring, L) if L else ring.one()
        mono = QSeries.monomial(m, -1, N)
        t = {(fe, yv): cs * mono for (fe, _), cs in e.items()}
        return ring.one() + RingElement._raw(ring, {k: v for k, v in t.items() if not v.is_zero()})
    step = _y_step(yv)
    kmax = N // m if m else None
    saturated = False
    if step:
        ky = Y // step
        if kmax is None or ky < kmax:
            saturated = True
            kmax = ky
    out = ring.one()
    for k in range(1, kmax + 1):
        e = exp_linear(ring, L, k) if L else ring.one()
        mono = QSeries.monomial(m * k, 1, N)
        y = tuple(k * x for x in yv)
        out = out + RingElement._raw(ring, {(fe, y): cs * mono for (fe, _), cs in e.items()})
    out.saturated = saturated
    return out


def poch_direct(f: PochFactor, ring: Ring) -> RingElement:
    """Integer power of one factor by multiplying binomials."""
    if f.formal_power is not None:
        raise ValueError("formal powers need the logarithmic route")
    yv = f.y_vector(ring)
    L = dict(f.L)
    inverse = f.power < 0
    out = ring.one()
    base = ring.one()
    for m in range(f.c, ring.N + 1):
        if m == 0 and not any(yv):
            raise ValueError("non-unit binomial")
        base = base * _binomial(ring, L, yv, m, inverse)
    for _ in range(abs(f.power)):
        out = out * base
    return out


def poch_product(factors: Sequence[PochFactor], ring: Ring, method: str = "auto") -> RingElement:
    """Product of factors under the truncation of ``ring``.

    ``method="direct"`` multiplies binomials for integer powers;
    ``method="exp"`` exponentiates the summed logarithms.  Factors with
    formal powers are grouped by power and always exponentiated, so that
    their degree-0 logarithms cancel before ``exp`` is taken.
    """
    if method not in ("auto", "direct", "exp"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "direct"
    out = ring.one()
    log_sum = ring.zero()
    for f in factors:
        fp = f.formal_power
        if fp is not None:
            sign, name = fp
            if name not in ring.formal_vars:
                raise ValueError(f"formal power {name!r} is not a declared variable")
            log_sum = log_sum + poch_log(f, ring) * ring.var(name).scale(sign)
        elif method == "exp":
            log_sum = log_sum + poch_log(f, ring).scale(f.power)
        else:
            out = out * poch_direct(f, ring)
    if not log_sum.is_zero() or log_sum.saturated:
        sat = log_sum.saturated
        _check_nilpotent(log_sum)
        e = exp_truncated(log_sum)
        e.saturated = e.saturated or sat
        out = out * e
    return out


# ---------------------------------------------------------------------------
# named traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceSpec:
    """A named product with its truncation triple.

    ``kind`` is one of ``lemma31``, ``theorem32`` (uses ``r``),
    ``bloch_okounkov`` or ``trace_PN`` (uses ``players`` and ``with_ab``).
    """

    kind: str
    N: int = 20
    D: int = 4
    Y: int | None = None
    r: int = 1
    players: int = 2
    with_ab: bool = False
    method: str = "auto"

    @classmethod
    def parse(cls, text: str, **kw) -> "TraceSpec":
        """Parse ``lemma31``, ``thm32:R``, ``bo`` or ``pn:N``."""
        t = text.strip().lower()
        if t == "lemma31":
            return cls("lemma31", **kw)
        if t in ("bo", "bloch_okounkov"):
            return cls("bloch_okounkov", **kw)
        if t.startswith("thm32:"):
            return cls("theorem32", r=int(t.split(":", 1)[1]), **kw)
        if t.startswith("pn:"):
            return cls("trace_PN", players=int(t.split(":", 1)[1]), **kw)
        raise ValueError(f"unknown trace {text!r} (expected lemma31, thm32:R, bo or pn:N)")


def pair_names(players: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, players + 1) for j in range(i + 1, players + 1)]


def trace_ring(spec: TraceSpec) -> Ring:
    if spec.kind == "lemma31":
        fv, yv = ("z", "w"), ()
    elif spec.kind == "bloch_okounkov":
        fv, yv = ("z",), ()
    elif spec.kind == "theorem32":
        if spec.r < 1:
            raise ValueError("theorem32 needs r >= 1")
        fv = tuple(f"z{j}" for j in range(1, spec.r + 1)) + tuple(f"w{j}" for j in range(1, spec.r))
        yv = ()
    elif spec.kind == "trace_PN":
        if spec.players < 2:
            raise ValueError("trace_PN needs at least two players")
        fv = []
        for i, j in pair_names(spec.players):
            fv += [f"z1_{i}{j}", f"z2_{i}{j}", f"v1_{i}{j}", f"v2_{i}{j}"]
        for i in range(1, spec.players + 1):
            fv += [f"z{i}", f"v{i}"]
        if spec.with_ab:
            fv += ["a", "b"]
        fv = tuple(fv)
        yv = tuple(f"y{i}" for i in range(1, spec.players + 1))
    else:
        raise ValueError(f"unknown trace kind {spec.kind!r}")
    ungraded = {"a", "b"} & set(fv)
    return Ring(fv, yv, spec.N, spec.D, spec.Y, frozenset(ungraded))


def trace_factors(spec: TraceSpec) -> list[PochFactor]:
    P = PochFactor
    if spec.kind == "lemma31":
        return [P((), (), 1, 1), P({"z": 1, "w": 1}, (), 1, 1), P({"z": 1}, (), 1, -1), P({"w": 1}, (), 1, -1)]
    if spec.kind == "bloch_okounkov":
        return [P({"z": 1}, (), 1, 1), P({"z": -1}, (), 1, 1), P((), (), 1, -2)]
    if spec.kind == "theorem32":
        r = spec.r
        fs = [P({f"z{j}": 1}, (), 1, 1) for j in range(1, r + 1)]
        fs += [P({f"w{j}": 1}, (), 1, -1) for j in range(1, r)]
        wr = {f"z{j}": 1 for j in range(1, r + 1)}
        for j in range(1, r):
            wr[f"w{j}"] = -1
        fs.append(P(wr, (), 1, -1))
        return fs
    fs = []
    for i, j in pair_names(spec.players):
        yij = {f"y{i}": -1, f"y{j}": 1}
        ymi = {f"y{i}": 1, f"y{j}": -1}
        z1, z2, v1, v2 = f"z1_{i}{j}", f"z2_{i}{j}", f"v1_{i}{j}", f"v2_{i}{j}"
        fs += [P({z1: 1, z2: 1}, yij, 0, 1), P((), yij, 0, 1), P({z1: 1}, yij, 0, -1), P({z2: 1}, yij, 0, -1)]
        fs += [P({v1: 1, v2: 1}, ymi, 1, 1), P((), ymi, 1, 1), P({v1: 1}, ymi, 1, -1), P({v2: 1}, ymi, 1, -1)]
    if spec.with_ab:
        for i in range(1, spec.players + 1):
            fs += [P({f"z{i}": 1}, {f"y{i}": 1}, 0, "a"), P((), {f"y{i}": 1}, 0, "-a")]
            fs += [P({f"v{i}": 1}, {f"y{i}": -1}, 1, "b"), P((), {f"y{i}": -1}, 1, "-b")]
    return fs


def estimate_terms(ring: Ring) -> int:
    """Upper bound on stored coefficients (monomials x y-box x q-order)."""
    g = sum(1 for v in ring.formal_vars if v not in ring.ungraded)
    u = len(ring.formal_vars) - g
    mons = math.comb(g + ring.D, ring.D) * (math.comb(u + ring.D, ring.D) if u else 1)
    return mons * (2 * ring.Y + 1) ** len(ring.y_vars) * (ring.N + 1)


def build_trace(spec: TraceSpec, budget_terms: int | None = None) -> RingElement:
    ring = trace_ring(spec)
    if budget_terms is not None and estimate_terms(ring) > budget_terms:
        raise BudgetExceeded(f"estimated {estimate_terms(ring)} coefficients exceed budget {budget_terms}")
    method = spec.method
    if method == "auto":
        method = "exp" if spec.kind == "trace_PN" else "direct"
    return poch_product(trace_factors(spec), ring, method)


def y0_coefficient(p: RingElement, allow_saturated: bool | None = None) -> RingElement:
    """Terms with all-zero y-exponent.

    A saturated element is accepted only when its y-bound is at least its
    q-order: every y-exponent beyond ``N`` in these products carries
    q-degree beyond ``N`` before it can be cancelled.
    """
    if allow_saturated is None:
        allow_saturated = p.Y >= p.N
    if p.saturated and not allow_saturated:
        raise ValueError(f"y-saturated element with Y={p.Y} < N={p.N}: dropped terms may contribute to y^0")
    return p.y0()


__all__ = ["PochFactor", "poch_log", "poch_direct", "poch_product", "TraceSpec", "trace_ring",
           "trace_factors", "build_trace", "y0_coefficient", "estimate_terms", "BudgetExceeded", "pair_names"]
