"""Reduction of constrained lattice sums to bi-brackets.

A :class:`SumSpec` describes

    sum  prod_i n_i^{u_i} d_i^{t_i} q^{sum n_i d_i}

over chains of ``(n, d)`` pairs.  Chains are *strict*
(``n_1 > n_2 > ... >= start``) or *free* (each ``n_i >= start``
independently), all ``d >= 1``.  Chains tagged ``A`` or ``B`` take part in
a single comparison ``sum_A d  (=, <, >)  sum_B d``.

:func:`order_decompose` turns free chains into strict ones;
:func:`eliminate` removes the constraint by the elimination recursion,
producing a :class:`BiBracketCombination`.  :func:`sumspec_eval` is the
brute-force oracle both are certified against.
"""
from __future__ import annotations

import functools
import itertools
import math
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .series import ONE, ZERO, QSeries, UPoly, as_rational
from .special import BiBracketIndex, bernoulli, bibracket

NPoly = UPoly


class ReductionError(RuntimeError):
    pass


class OracleBudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# sums of powers
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def faulhaber(t: int) -> NPoly:
    """``S_t(n) = sum_{k=1}^n k^t`` from the Bernoulli-number formula."""
    if t < 0:
        raise ValueError("t must be non-negative")
    coeffs = [ZERO] * (t + 2)
    for j in range(t + 1):
        coeffs[t + 1 - j] += mpq(math.comb(t + 1, j)) * (-1) ** j * bernoulli(j) / (t + 1)
    return NPoly(coeffs)


def _sum_over_first(poly_nd: dict[tuple[int, int], mpq], n_lower: int = 0) -> NPoly:
    """``sum_{d=n_lower}^{n} f(n, d)`` for ``f = sum c n^a d^b`` as a polynomial in ``n``."""
    out = NPoly()
    for (a, b), c in poly_nd.items():
        s = faulhaber(b)
        if n_lower == 0 and b == 0:
            s = s + NPoly([1])  # the d = 0 term, 0^0 = 1
        out = out + (s * NPoly.monomial(a)) * c
    return out


def _shifted_terms(p: NPoly) -> dict[tuple[int, int], mpq]:
    """Expand ``p(n - d)`` as ``{(a, b): c}`` meaning ``c n^a d^b``."""
    out: dict[tuple[int, int], mpq] = defaultdict(lambda: ZERO)
    for k, c in enumerate(p.coeffs):
        if not c:
            continue
        for b in range(k + 1):
            out[(k - b, b)] += c * math.comb(k, b) * (-1) ** b
    return out


def _check_positive(ts: Sequence[int]) -> None:
    if not ts:
        raise ValueError("need at least one exponent")
    if any(t < 1 for t in ts):
        raise ValueError(f"exponents must be >= 1 (got {list(ts)})")


@functools.lru_cache(maxsize=None)
def _power_sum_le(ts: tuple[int, ...]) -> NPoly:
    if len(ts) == 1:
        return faulhaber(ts[0])
    prev = _power_sum_le(ts[:-1])
    terms = _shifted_terms(prev)
    tr = ts[-1]
    # sum_{d=0}^{n} d^tr A_{r-1}(n-d); d = 0 contributes nothing since tr >= 1
    return _sum_over_first({(a, b + tr): c for (a, b), c in terms.items()}, n_lower=1)


def power_sum_le(ts: Sequence[int]) -> NPoly:
    """``sum_{d_1+...+d_r <= n, d_i >= 1} prod d_i^{t_i}`` as a polynomial in ``n``."""
    ts = tuple(int(t) for t in ts)
    _check_positive(ts)
    return _power_sum_le(ts)


@functools.lru_cache(maxsize=None)
def _power_sum_eq(ts: tuple[int, ...]) -> NPoly:
    if len(ts) == 1:
        return NPoly.monomial(ts[0])
    *head, tr = ts
    r1 = len(head)
    out = NPoly()
    # (n - d_1 - ... - d_{r-1})^tr expanded multinomially
    for ks in _weak_compositions(tr, r1 + 1):
        k0, rest = ks[0], ks[1:]
        coeff = mpq(math.factorial(tr))
        for k in ks:
            coeff /= math.factorial(k)
        coeff *= (-1) ** sum(rest)
        inner = _power_sum_le(tuple(t + k for t, k in zip(head, rest)))
        out = out + (inner * NPoly.monomial(k0)) * coeff
    return out


def power_sum_eq(ts: Sequence[int]) -> NPoly:
    """``sum_{d_1+...+d_r = n, d_i >= 1} prod d_i^{t_i}`` as a polynomial in ``n``."""
    ts = tuple(int(t) for t in ts)
    _check_positive(ts)
    return _power_sum_eq(ts)


@functools.lru_cache(maxsize=None)
def composition_sum(ts: tuple[int, ...]) -> NPoly:
    """Like :func:`power_sum_eq` but allowing ``t_i = 0``; valid for ``n >= 1``.

    Built by peeling one part at a time: ``C(n) = sum_{d=1}^{n-1} d^t C'(n-d)``.
    """
    ts = tuple(int(t) for t in ts)
    if not ts or any(t < 0 for t in ts):
        raise ValueError("need a non-empty list of non-negative exponents")
    if len(ts) == 1:
        return NPoly.monomial(ts[0])
    prev = composition_sum(ts[:-1])
    tr = ts[-1]
    out = NPoly()
    for (a, b), c in _shifted_terms(prev).items():
        k = b + tr
        # sum_{d=1}^{n-1} d^k = S_k(n) - n^k
        s = faulhaber(k) - NPoly.monomial(k)
        out = out + (s * NPoly.monomial(a)) * c
    return out


def _weak_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _weak_compositions(total - k, parts - 1):
            yield (k,) + rest


# ---------------------------------------------------------------------------
# sum specifications
# ---------------------------------------------------------------------------

Exps = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Chain:
    """A run of ``(n, d)`` pairs with exponents ``(u, t)`` per position."""

    exps: Exps
    start: int = 1
    ordering: str = "strict"
    group: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "exps", tuple((int(u), int(t)) for u, t in self.exps))
        if self.start not in (0, 1):
            raise ValueError("chain start must be 0 or 1")
        if self.ordering not in ("strict", "free"):
            raise ValueError("ordering must be 'strict' or 'free'")
        if self.group not in (None, "A", "B"):
            raise ValueError("group must be None, 'A' or 'B'")
        if any(u < 0 or t < 0 for u, t in self.exps):
            raise ValueError("exponents must be non-negative")

    def __len__(self) -> int:
        return len(self.exps)

    @property
    def weight(self) -> int:
        return sum(u + t + 1 for u, t in self.exps)

    def to_json(self) -> dict:
        return {"start": self.start, "ordering": self.ordering, "group": self.group,
                "u": [u for u, _ in self.exps], "t": [t for _, t in self.exps]}

    @classmethod
    def from_json(cls, d: Mapping) -> "Chain":
        u, t = list(d.get("u", [])), list(d.get("t", []))
        if len(u) != len(t):
            raise ValueError("chain u and t lists differ in length")
        return cls(tuple(zip(u, t)), int(d.get("start", 1)), d.get("ordering", "strict"), d.get("group"))


@dataclass(frozen=True)
class SumSpec:
    chains: tuple[Chain, ...] = ()
    constraint: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(self.chains))
        if self.constraint not in ("none", "eq", "lt", "gt"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        # normalise: group A chains, then group B, then ungrouped
        order = {"A": 0, "B": 1, None: 2}
        object.__setattr__(self, "chains", tuple(sorted(self.chains, key=lambda c: order[c.group])))

    @property
    def weight(self) -> int:
        return sum(c.weight for c in self.chains)

    def group(self, g: str) -> list[Chain]:
        return [c for c in self.chains if c.group == g]

    @property
    def all_t_positive(self) -> bool:
        return all(t >= 1 for c in self.chains for _, t in c.exps)

    def to_json(self) -> dict:
        return {"constraint": self.constraint, "chains": [c.to_json() for c in self.chains]}

    @classmethod
    def from_json(cls, d: Mapping) -> "SumSpec":
        return cls(tuple(Chain.from_json(c) for c in d.get("chains", [])), d.get("constraint", "none"))

    @classmethod
    def W(cls, A: Exps, B: Exps, ordering: str = "strict", constraint: str = "eq") -> "SumSpec":
        """The standard shape: ``A`` starts at 0, ``B`` at 1, ``sum_A d = sum_B d``."""
        return cls((Chain(A, 0, ordering, "A"), Chain(B, 1, ordering, "B")), constraint)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


def _chain_table(ch: Chain, N: int, Dmax: int, budget: list) -> dict[tuple[int, int], mpq]:
    """``{(q-degree, d-sum): weight}`` for one chain."""

    table: dict[tuple[int, int], mpq] = defaultdict(lambda: ZERO)
    exps = ch.exps
    k = len(exps)
    if k == 0:
        table[(0, 0)] = ONE
        return table

    def rec(pos: int, upper: int | None, q: int, ds: int, w: mpq):
        if pos == k:
            budget[0] -= 1
            if budget[0] < 0:
                raise OracleBudgetExceeded("oracle enumeration exceeded its budget")
            table[(q, ds)] += w
            return
        u, t = exps[pos]
        lower = ch.start
        # strict: positions after pos need distinct smaller values
        if ch.ordering == "strict":
            lower = ch.start + (k - 1 - pos)
        for n in range(lower, N + 1):
            if ch.ordering == "strict" and upper is not None and n >= upper:
                break
            dlim = Dmax - ds if n == 0 else min(Dmax - ds, (N - q) // n)
            if dlim < 1:
                if n == 0:
                    continue
                break
            nu = mpq(n) ** u if (n or u) else ONE
            if not nu:
                continue
            for d in range(1, dlim + 1):
                rec(pos + 1, n, q + n * d, ds + d, w * nu * mpq(d) ** t)

    rec(0, None, 0, 0, ONE)
    return {key: v for key, v in table.items() if v}


def sumspec_eval(spec: SumSpec, N: int, budget: int = 5_000_000) -> QSeries:
    """Evaluate ``spec`` to ``q^N`` by direct enumeration."""
    A, B, free = spec.group("A"), spec.group("B"), spec.group(None)
    has_zero = [c for c in spec.chains if c.start == 0 and len(c)]
    if has_zero:
        # a zero-start position contributes q^0 for every d: d must be bounded by the constraint
        ok = spec.constraint in ("eq", "lt") and all(c.group == "A" for c in has_zero) \
            and any(c.start == 1 and len(c) for c in B)
        if not ok:
            raise ValueError("sum diverges: a chain starting at 0 is not bounded by the constraint")
    Dmax = N if has_zero else N
    bud = [budget]
    tables = {id(c): _chain_table(c, N, Dmax, bud) for c in spec.chains}

    def combine(chs):
        acc = {(0, 0): ONE}
        for c in chs:
            nxt: dict = defaultdict(lambda: ZERO)
            for (q1, d1), w1 in acc.items():
                for (q2, d2), w2 in tables[id(c)].items():
                    if q1 + q2 <= N and d1 + d2 <= Dmax:
                        nxt[(q1 + q2, d1 + d2)] += w1 * w2
            acc = nxt
        return acc

    ta, tb, tf = combine(A), combine(B), combine(free)
    rel = spec.constraint
    out = [ZERO] * (N + 1)
    joint: dict[int, mpq] = defaultdict(lambda: ZERO)
    for (qa, da), wa in ta.items():
        for (qb, db), wb in tb.items():
            if qa + qb > N:
                continue
            if rel == "eq" and da != db or rel == "lt" and not da < db or rel == "gt" and not da > db:
                continue
            joint[qa + qb] += wa * wb
    for q1, w1 in joint.items():
        for (q2, _), w2 in tf.items():
            if q1 + q2 <= N:
                out[q1 + q2] += w1 * w2
    return QSeries(out, N)


# ---------------------------------------------------------------------------
# bi-bracket combinations
# ---------------------------------------------------------------------------

BKey = tuple[BiBracketIndex, ...]


def _norm_key(parts: Iterable[BiBracketIndex]) -> BKey:
    return tuple(sorted(p for p in parts if p.depth))


class BiBracketCombination:
    """Finite ``Q``-combination of bi-brackets and products of two bi-brackets."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[BKey, object] | None = None):
        t: dict[BKey, mpq] = {}
        for k, c in (terms or {}).items():
            c = as_rational(c)
            if c:
                key = _norm_key(k)
                t[key] = t.get(key, ZERO) + c
        self.terms = {k: c for k, c in t.items() if c}

    @classmethod
    def unit(cls) -> "BiBracketCombination":
        return cls({(): ONE})

    def __add__(self, other: "BiBracketCombination") -> "BiBracketCombination":
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, ZERO) + c
        out = BiBracketCombination()
        out.terms = {k: c for k, c in t.items() if c}
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "BiBracketCombination":
        c = as_rational(c)
        out = BiBracketCombination()
        out.terms = {k: v * c for k, v in self.terms.items()} if c else {}
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, BiBracketCombination) and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def evaluate(self, N: int) -> QSeries:
        acc = QSeries.zero(N)
        for key, c in self.terms.items():
            s = QSeries.one(N)
            for idx in key:
                s = s * bibracket(idx, N)
            acc = acc + s.scale(c)
        return acc

    @staticmethod
    def key_weight(key: BKey) -> int:
        return sum(i.weight for i in key)

    @property
    def max_weight(self) -> int:
        return max((self.key_weight(k) for k in self.terms), default=0)

    @property
    def indices(self) -> list[BiBracketIndex]:
        return sorted({i for k in self.terms for i in k})

    def all_in_qBD(self) -> bool:
        return all(i.in_qBD for k in self.terms for i in k)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (self.key_weight(kv[0]), len(kv[0]), kv[0]))

    def to_json(self) -> list:
        return [{"factors": [{"s": list(i.s), "r": list(i.r)} for i in k], "coeff": str(c)}
                for k, c in self.sorted_items()]

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.sorted_items():
            label = "*".join(str(i) for i in k) or "1"
            parts.append(f"{c}*{label}")
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# decomposition of free chains into strict ones
# ---------------------------------------------------------------------------


def ordered_set_partitions(items: Sequence[int]):
    """All ordered set partitions (weak orderings) of ``items``."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in ordered_set_partitions(rest):
        # put first into an existing block, or into a new block at any slot
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        for i in range(len(p) + 1):
            yield p[:i] + [[first]] + p[i:]


def _decompose_chain(ch: Chain) -> list[tuple[mpq, Chain]]:
    if ch.ordering == "strict" or len(ch) <= 1:
        return [(ONE, Chain(ch.exps, ch.start, "strict", ch.group))]
    out: dict[Exps, mpq] = defaultdict(lambda: ZERO)
    for blocks in ordered_set_partitions(range(len(ch))):
        per_block = []
        for blk in blocks:
            u = sum(ch.exps[i][0] for i in blk)
            poly = composition_sum(tuple(sorted(ch.exps[i][1] for i in blk)))
            per_block.append([((u, j), c) for j, c in enumerate(poly.coeffs) if c])
        for combo in itertools.product(*per_block):
            coeff = ONE
            for _, c in combo:
                coeff *= c
            out[tuple(e for e, _ in combo)] += coeff
    return [(c, Chain(e, ch.start, "strict", ch.group)) for e, c in sorted(out.items()) if c]


def order_decompose(spec: SumSpec) -> list[tuple[mpq, SumSpec]]:
    """Rewrite free chains as signed sums of strict chains."""
    per_chain = [_decompose_chain(c) for c in spec.chains]
    out: dict[SumSpec, mpq] = {}
    for combo in itertools.product(*per_chain):
        coeff = ONE
        for c, _ in combo:
            coeff *= c
        s = SumSpec(tuple(ch for _, ch in combo), spec.constraint)
        out[s] = out.get(s, ZERO) + coeff
    return [(c, s) for s, c in out.items() if c]


# ---------------------------------------------------------------------------
# sparse multivariate helper
# ---------------------------------------------------------------------------


class _MPoly:
    """Sparse polynomial: ``{exponent tuple: coeff}`` over a fixed variable count."""

    __slots__ = ("nv", "t")

    def __init__(self, nv: int, t=None):
        self.nv = nv
        self.t = t if t is not None else {(0,) * nv: ONE}

    def mul(self, other: "_MPoly") -> "_MPoly":
        out: dict = defaultdict(lambda: ZERO)
        for ea, ca in self.t.items():
            for eb, cb in other.t.items():
                out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
        return _MPoly(self.nv, {k: v for k, v in out.items() if v})

    def linear_power(self, coeffs: Mapping[int, int], k: int) -> "_MPoly":
        """Multiply by ``(sum_i c_i x_i)^k``."""
        if k == 0:
            return self
        lin = _MPoly(self.nv, {})
        for i, c in coeffs.items():
            e = [0] * self.nv
            e[i] = 1
            lin.t[tuple(e)] = mpq(c)
        base = _MPoly(self.nv)
        for _ in range(k):
            base = base.mul(lin)
        return self.mul(base)

    def monomial(self, i: int, k: int) -> "_MPoly":
        if k == 0:
            return self
        return _MPoly(self.nv, {e[:i] + (e[i] + k,) + e[i + 1:]: c for e, c in self.t.items()})


# ---------------------------------------------------------------------------
# elimination recursion
# ---------------------------------------------------------------------------


@dataclass
class EliminationStats:
    nodes: int = 0
    certified: int = 0
    max_depth: int = 0


class _Eliminator:
    def __init__(self, strategy: str = "auto", max_depth: int = 200, certify_order: int | None = None,
                 oracle_budget: int = 2_000_000):
        if strategy not in ("auto", "forward", "mirror"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.max_depth = max_depth
        self.certify_order = certify_order
        self.oracle_budget = oracle_budget
        self.memo: dict = {}
        self.stats = EliminationStats()
        self.depth = 0

    # -- public --------------------------------------------------------------

    def node(self, rel: str, a0: int, A: Exps, B: Exps) -> BiBracketCombination:
        key = (rel, a0, A, B)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.depth += 1
        self.stats.max_depth = max(self.stats.max_depth, self.depth)
        if self.depth > self.max_depth:
            raise ReductionError(f"elimination depth exceeded {self.max_depth} at {key}")
        try:
            val = self._compute(rel, a0, A, B)
        finally:
            self.depth -= 1
        self.stats.nodes += 1
        if self.certify_order is not None:
            self._certify(rel, a0, A, B, val)
        self.memo[key] = val
        return val

    def _certify(self, rel, a0, A, B, val):
        spec = SumSpec((Chain(A, a0, "strict", "A"), Chain(B, 1, "strict", "B")), rel)
        N = self.certify_order
        try:
            ref = sumspec_eval(spec, N, self.oracle_budget)
        except OracleBudgetExceeded:
            return
        got = val.evaluate(N)
        if got != ref:
            raise ReductionError(f"certification failed for node {rel} a0={a0} A={A} B={B}")
        self.stats.certified += 1

    # -- recursion -----------------------------------------------------------

    def _forward(self, A: Exps, B: Exps) -> bool:
        if self.strategy == "forward":
            return True
        if self.strategy == "mirror":
            return False
        return len(B) <= len(A)

    def _compute(self, rel, a0, A, B) -> BiBracketCombination:
        if rel == "none":
            return self._none(a0, A, B)
        if rel == "eq":
            if not A and not B:
                return BiBracketCombination.unit()
            if not A or not B:
                return BiBracketCombination()
            if a0 == 1:
                return self._eq1(A, B)
            return self._eq0_forward(A, B) if self._forward(A, B) else self._eq0_mirror(A, B)
        if a0 != 1:
            raise ReductionError(f"'{rel}' nodes need the A chain to start at 1")
        if rel == "gt":
            if not B:
                return self._none(1, A, ()) if A else BiBracketCombination()
            if not A:
                return BiBracketCombination()
            if self._forward(A, B):
                return self._none(1, A, B) - self.node("eq", 1, A, B) - self.node("lt", 1, A, B)
            return self._gt_mirror(A, B)
        if rel == "lt":
            if not A:
                return self._none(1, (), B) if B else BiBracketCombination()
            if not B:
                return BiBracketCombination()
            if self._forward(A, B):
                return self._lt_forward(A, B)
            return self._none(1, A, B) - self.node("eq", 1, A, B) - self.node("gt", 1, A, B)
        raise ReductionError(f"unknown relation {rel!r}")

    @staticmethod
    def _chain_value(ch: Exps) -> tuple[mpq, BiBracketIndex]:
        c = ONE
        for u, t in ch:
            c *= math.factorial(u) * math.factorial(t)
        return c, BiBracketIndex(tuple(t + 1 for _, t in ch), tuple(u for u, _ in ch))

    def _none(self, a0, A, B) -> BiBracketCombination:
        if A and a0 == 0:
            raise ReductionError("unconstrained chain starting at 0 diverges")
        ca, ia = self._chain_value(A)
        cb, ib = self._chain_value(B)
        return BiBracketCombination({(ia, ib): ca * cb})

    def _collect(self, rel: str, poly: _MPoly, layout, sign) -> BiBracketCombination:
        """Group monomials of ``poly`` into nodes ``rel(1, A, B)``.

        ``layout`` maps each new A/B position to (n-var index, d-var index).
        """
        la, lb = layout
        nodes: dict = defaultdict(lambda: ZERO)
        for e, c in poly.t.items():
            A = tuple((e[i], e[j]) for i, j in la)
            B = tuple((e[i], e[j]) for i, j in lb)
            nodes[(A, B)] += c
        out = BiBracketCombination()
        for (A, B), c in sorted(nodes.items()):
            if c:
                out = out + self.node(rel, 1, A, B).scale(c * sign)
        return out

    def _eq1(self, A, B) -> BiBracketCombination:
        val = self.node("eq", 0, A, B)
        u_r, t_r = A[-1]
        if u_r:
            return val
        # n_r = 0 slice: d_r = sum_B d - sum_A' d >= 1
        Ap = A[:-1]
        r1, s = len(Ap), len(B)
        nv = 2 * (r1 + s)
        # vars: nA'(r1) dA'(r1) nB(s) dB(s)
        ndA = lambda i: r1 + i
        nB = lambda j: 2 * r1 + j
        dB = lambda j: 2 * r1 + s + j
        p = _MPoly(nv)
        for i, (u, t) in enumerate(Ap):
            p = p.monomial(i, u).monomial(ndA(i), t)
        for j, (u, t) in enumerate(B):
            p = p.monomial(nB(j), u).monomial(dB(j), t)
        lin = {dB(j): 1 for j in range(s)}
        lin.update({ndA(i): -1 for i in range(r1)})
        p = p.linear_power(lin, t_r)
        layout = ([(i, ndA(i)) for i in range(r1)], [(nB(j), dB(j)) for j in range(s)])
        return val - self._collect("lt", p, layout, 1)

    def _eq0_forward(self, A, B) -> BiBracketCombination:
        r, s1 = len(A), len(B) - 1
        u_s, t_s = B[-1]
        # vars: nA(r) dA(r) nB'(s1) dB'(s1) n
        nA = lambda i: i
        dA = lambda i: r + i
        nB = lambda j: 2 * r + j
        dB = lambda j: 2 * r + s1 + j
        n = 2 * r + 2 * s1
        nv = n + 1
        p = _MPoly(nv)
        for i, (u, t) in enumerate(A):
            p = p.linear_power({nA(i): 1, n: -1}, u).monomial(dA(i), t)
        for j, (u, t) in enumerate(B[:-1]):
            p = p.linear_power({nB(j): 1, n: 1}, u).monomial(dB(j), t)
        p = p.monomial(n, u_s)
        lin = {dA(i): 1 for i in range(r)}
        lin.update({dB(j): -1 for j in range(s1)})
        p = p.linear_power(lin, t_s)
        # sum_{n=1}^{n_r} n^a = S_a(n_r)
        q: dict = defaultdict(lambda: ZERO)
        last = nA(r - 1)
        for e, c in p.t.items():
            a = e[n]
            for k, fc in enumerate(faulhaber(a).coeffs):
                if fc:
                    ee = list(e)
                    ee[n] = 0
                    ee[last] += k
                    q[tuple(ee)] += c * fc
        poly = _MPoly(nv, {k: v for k, v in q.items() if v})
        layout = ([(nA(i), dA(i)) for i in range(r)], [(nB(j), dB(j)) for j in range(s1)])
        return self._collect("gt", poly, layout, 1)

    def _lt_forward(self, A, B) -> BiBracketCombination:
        r, s1 = len(A), len(B) - 1
        u_s, t_s = B[-1]
        # vars: nA(r) dA(r) n d nB'(s1) dB'(s1)
        nA = lambda i: i
        dA = lambda i: r + i
        n, d = 2 * r, 2 * r + 1
        nB = lambda j: 2 * r + 2 + j
        dB = lambda j: 2 * r + 2 + s1 + j
        nv = 2 * r + 2 + 2 * s1
        p = _MPoly(nv)
        for i, (u, t) in enumerate(A):
            p = p.linear_power({nA(i): 1, n: -1}, u).monomial(dA(i), t)
        for j, (u, t) in enumerate(B[:-1]):
            p = p.linear_power({nB(j): 1, n: 1}, u).monomial(dB(j), t)
        p = p.monomial(n, u_s)
        lin = {dA(i): 1 for i in range(r)}
        lin[d] = 1
        lin.update({dB(j): -1 for j in range(s1)})
        p = p.linear_power(lin, t_s)
        layout = ([(nA(i), dA(i)) for i in range(r)] + [(n, d)], [(nB(j), dB(j)) for j in range(s1)])
        return self._collect("gt", p, layout, 1)

    def _eq0_mirror(self, A, B) -> BiBracketCombination:
        r1, s = len(A) - 1, len(B)
        u_r, t_r = A[-1]
        # vars: nA'(r1) dA'(r1) nB(s) dB(s) n
        nA = lambda i: i
        dA = lambda i: r1 + i
        nB = lambda j: 2 * r1 + j
        dB = lambda j: 2 * r1 + s + j
        n = 2 * r1 + 2 * s
        nv = n + 1
        p = _MPoly(nv)
        for i, (u, t) in enumerate(A[:-1]):
            p = p.linear_power({nA(i): 1, n: 1}, u).monomial(dA(i), t)
        for j, (u, t) in enumerate(B):
            p = p.linear_power({nB(j): 1, n: -1}, u).monomial(dB(j), t)
        p = p.monomial(n, u_r)
        lin = {dB(j): 1 for j in range(s)}
        lin.update({dA(i): -1 for i in range(r1)})
        p = p.linear_power(lin, t_r)
        # sum_{n=0}^{M-1} n^a = S_a(M) - M^a + [a = 0], M = last B variable
        q: dict = defaultdict(lambda: ZERO)
        last = nB(s - 1)
        for e, c in p.t.items():
            a = e[n]
            poly = faulhaber(a) - NPoly.monomial(a) + (NPoly([1]) if a == 0 else NPoly())
            for k, fc in enumerate(poly.coeffs):
                if fc:
                    ee = list(e)
                    ee[n] = 0
                    ee[last] += k
                    q[tuple(ee)] += c * fc
        poly = _MPoly(nv, {k: v for k, v in q.items() if v})
        layout = ([(nA(i), dA(i)) for i in range(r1)], [(nB(j), dB(j)) for j in range(s)])
        return self._collect("lt", poly, layout, 1)

    def _gt_mirror(self, A, B) -> BiBracketCombination:
        r1, s = len(A) - 1, len(B)
        u_r, t_r = A[-1]
        # vars: nA'(r1) dA'(r1) nB(s) dB(s) n d
        nA = lambda i: i
        dA = lambda i: r1 + i
        nB = lambda j: 2 * r1 + j
        dB = lambda j: 2 * r1 + s + j
        n, d = 2 * r1 + 2 * s, 2 * r1 + 2 * s + 1
        nv = d + 1
        p = _MPoly(nv)
        for i, (u, t) in enumerate(A[:-1]):
            p = p.linear_power({nA(i): 1, n: 1}, u).monomial(dA(i), t)
        for j, (u, t) in enumerate(B):
            p = p.linear_power({nB(j): 1, n: -1}, u).monomial(dB(j), t)
        p = p.monomial(n, u_r)
        lin = {dB(j): 1 for j in range(s)}
        lin[d] = 1
        lin.update({dA(i): -1 for i in range(r1)})
        p = p.linear_power(lin, t_r)
        layout = ([(nA(i), dA(i)) for i in range(r1)], [(nB(j), dB(j)) for j in range(s)] + [(n, d)])
        return self._collect("lt", p, layout, 1)


def eliminate(spec: SumSpec, strategy: str = "auto", max_depth: int = 200,
              certify_order: int | None = None, stats: EliminationStats | None = None) -> BiBracketCombination:
    """Express a single-constraint sum over two strict chains as bi-brackets.

    ``spec`` must have exactly one strict chain in each of groups ``A`` and
    ``B``; ``B`` starts at 1.  With ``certify_order`` set, every
    intermediate node is compared with :func:`sumspec_eval` at that order.
    """
    A, B = spec.group("A"), spec.group("B")
    if spec.group(None):
        raise ValueError("eliminate takes only constrained chains")
    if len(A) != 1 or len(B) != 1 or not len(A[0]) or not len(B[0]):
        raise ValueError("eliminate needs exactly one non-empty chain in each constraint group")
    a, b = A[0], B[0]
    if a.ordering != "strict" or b.ordering != "strict":
        raise ValueError("chains must be strict; run order_decompose first")
    if b.start != 1:
        raise ValueError("the B chain must start at 1")
    if spec.constraint == "none":
        raise ValueError("eliminate needs a constraint")
    if spec.constraint != "eq" and a.start != 1:
        raise ValueError("'lt'/'gt' constraints need the A chain to start at 1")
    el = _Eliminator(strategy, max_depth, certify_order)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20 * max_depth + 1000))
    try:
        out = el.node(spec.constraint, a.start, a.exps, b.exps)
    finally:
        sys.setrecursionlimit(limit)
    if stats is not None:
        stats.nodes, stats.certified, stats.max_depth = el.stats.nodes, el.stats.certified, el.stats.max_depth
    return out


def reduce_sumspec(spec: SumSpec, strategy: str = "auto", certify_order: int | None = None,
                   max_depth: int = 200) -> BiBracketCombination:
    """:func:`order_decompose` followed by :func:`eliminate` on every piece."""
    total = BiBracketCombination()
    for c, piece in order_decompose(spec):
        total = total + eliminate(piece, strategy, max_depth, certify_order).scale(c)
    return total


__all__ = [
    "NPoly", "faulhaber", "power_sum_le", "power_sum_eq", "composition_sum", "Chain", "SumSpec",
    "sumspec_eval", "BiBracketCombination", "ordered_set_partitions", "order_decompose", "eliminate",
    "reduce_sumspec", "EliminationStats", "ReductionError", "OracleBudgetExceeded",
]
