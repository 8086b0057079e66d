"""Weight-graded bases and exact span membership.

Membership is always certified up to a stated q-order; agreement of
truncated expansions is necessary-condition evidence, not a proof.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import linalg
from .products import BudgetExceeded
from .series import QSeries, RingElement, format_monomial
from .special import (BiBracketIndex, BracketIndex, FamilyTag, bibracket, bibracket_indices, bracket,
                      bracket_indices, compositions, eisenstein, zvalue)

DEFAULT_MARGIN = 10


@dataclass(frozen=True)
class BasisElement:
    label: str
    weight: int
    series: QSeries
    family: FamilyTag
    factors: tuple = ()
    order_key: tuple = ()

    @property
    def in_qBD(self) -> bool:
        return all(getattr(f, "in_qBD", True) for f in self.factors)


@dataclass
class SpanCertificate:
    status: str  # "member" or "refuted_at_order"
    coordinates: dict[str, mpq]
    q_order: int
    residual: QSeries
    basis_size: int
    rank: int
    underdetermined: bool = False

    @property
    def member(self) -> bool:
        return self.status == "member"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "q_order": self.q_order,
            "coordinates": {k: str(v) for k, v in self.coordinates.items() if v},
            "residual": self.residual.to_json(),
            "basis_size": self.basis_size,
            "rank": self.rank,
            "underdetermined": self.underdetermined,
            "note": "agreement up to the stated q-order only",
        }


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


def _monomial_basis(gens: list[tuple[str, int, object, QSeries]], max_weight: int, N: int,
                    family: FamilyTag) -> list[BasisElement]:
    weights = [g[1] for g in gens]
    out = []

    def rec(start, remaining, acc):
        out.append(tuple(acc))
        for i in range(start, len(gens)):
            if weights[i] <= remaining:
                acc.append(i)
                rec(i, remaining - weights[i], acc)
                acc.pop()

    rec(0, max_weight, [])
    elems = []
    for mono in out:
        series = QSeries.one(N)
        labels = []
        for i, grp in itertools.groupby(mono):
            k = len(list(grp))
            labels.append(gens[i][0] + (f"^{k}" if k > 1 else ""))
        for i in mono:
            series = series * gens[i][3]
        elems.append(BasisElement("*".join(labels) or "1", sum(weights[i] for i in mono), series, family,
                                  tuple(gens[i][2] for i in mono), tuple(_index_key(gens[i][2]) for i in mono)))
    return _graded(elems)


def _index_key(idx) -> tuple:
    # shallower first, then larger leading entries first
    if isinstance(idx, BiBracketIndex):
        return (idx.depth, tuple(-x for x in idx.s), idx.r)
    if isinstance(idx, tuple):
        return (len(idx), tuple(-x for x in idx), ())
    return (0, (), (str(idx),))


def _graded(elems: list[BasisElement]) -> list[BasisElement]:
    return sorted(elems, key=lambda e: (e.weight, len(e.factors) if e.order_key else 0, e.order_key, e.label))


def enumerate_basis(family, max_weight: int, N: int, presentation: str = "bracket",
                    budget: int = 5000) -> list[BasisElement]:
    """All elements of ``family`` with weight ``<= max_weight`` at q-order ``N``.

    For ``qMZV`` the generators are the brackets ``[s_1..s_k]`` with every
    ``s_i >= 2`` (``presentation="bracket"``) or Okounkov's ``Z(s_1..s_k)``
    (``presentation="okounkov"``); basis elements are monomials in them.
    ``QM`` uses monomials in ``G_2, G_4, G_6``.
    """
    family = FamilyTag(family)
    if max_weight < 0:
        raise ValueError("max_weight must be non-negative")
    elems: list[BasisElement] = []
    if family in (FamilyTag.MD, FamilyTag.qMD):
        for w in range(max_weight + 1):
            for idx in bracket_indices(w, q_only=family == FamilyTag.qMD):
                bi = BiBracketIndex(idx.s, (0,) * idx.depth)
                elems.append(BasisElement(str(idx) if idx.depth else "1", w, bracket(idx, N), family, (bi,),
                                          (_index_key(bi),)))
    elif family in (FamilyTag.BD, FamilyTag.qBD):
        for w in range(max_weight + 1):
            for idx in bibracket_indices(w, qbd_only=family == FamilyTag.qBD):
                elems.append(BasisElement(str(idx) if idx.depth else "1", w, bibracket(idx, N), family, (idx,),
                                          (_index_key(idx),)))
    elif family == FamilyTag.qMZV:
        gens = []
        for w in range(2, max_weight + 1):
            for s in compositions(w, 2):
                if presentation == "bracket":
                    idx = BracketIndex(s)
                    gens.append((str(idx), w, BiBracketIndex(s, (0,) * len(s)), bracket(idx, N)))
                elif presentation == "okounkov":
                    gens.append(("Z(" + ",".join(map(str, s)) + ")", w, s, zvalue(s, N)))
                else:
                    raise ValueError(f"unknown qMZV presentation {presentation!r}")
        _check_budget(gens, max_weight, budget)
        elems = _monomial_basis(gens, max_weight, N, family)
    elif family == FamilyTag.QM:
        gens = [(f"G{k}", k, f"G{k}", eisenstein(k, N)) for k in (2, 4, 6) if k <= max_weight]
        elems = _monomial_basis(gens, max_weight, N, family)
    if len(elems) > budget:
        raise BudgetExceeded(f"basis of {len(elems)} elements exceeds budget {budget}")
    return _graded(elems)


def _check_budget(gens, max_weight, budget):
    # number of monomials grows fast; count before building series
    counts = [0] * (max_weight + 1)
    counts[0] = 1
    for _, w, _, _ in gens:
        for total in range(w, max_weight + 1):
            counts[total] += counts[total - w]
    if sum(counts) > budget:
        raise BudgetExceeded(f"basis of {sum(counts)} monomials exceeds budget {budget}")


def select_weight(basis: Sequence[BasisElement], weight: int, rule: str) -> list[BasisElement]:
    if rule == "exact":
        return [b for b in basis if b.weight == weight]
    if rule == "at_most":
        return [b for b in basis if b.weight <= weight]
    raise ValueError(f"unknown weight rule {rule!r}")


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def express(target: QSeries, basis: Sequence[BasisElement], N: int | None = None,
            margin: int = DEFAULT_MARGIN) -> SpanCertificate:
    """Coordinates of ``target`` in ``basis`` from the first ``N + 1`` coefficients."""
    if N is None:
        N = target.N
    if N > target.N or any(b.series.N < N for b in basis):
        raise ValueError("q-order exceeds the precision of the target or basis")
    under = N + 1 < len(basis) + margin
    if under:
        warnings.warn(f"q-order {N} gives {N + 1} equations for {len(basis)} unknowns "
                      f"(margin {margin}); membership is weak evidence", RuntimeWarning, stacklevel=2)
    tgt = target.truncate(N)
    cols = [b.series.truncate(N).coeffs for b in basis]
    if tgt.is_zero():
        x, rk = [mpq(0)] * len(basis), linalg.rank(cols)
    else:
        x, rk = linalg.solve(cols, tgt.coeffs)
    if x is None:
        return SpanCertificate("refuted_at_order", {}, N, _residual_lsq(tgt, basis, N), len(basis), rk, under)
    coords = {b.label: c for b, c in zip(basis, x)}
    return SpanCertificate("member", coords, N, residual(tgt, basis, coords, N), len(basis), rk, under)


def residual(target: QSeries, basis: Sequence[BasisElement], coords: dict, N: int) -> QSeries:
    acc = target.truncate(N)
    for b in basis:
        c = coords.get(b.label)
        if c:
            acc = acc - b.series.truncate(N).scale(c)
    return acc


def _residual_lsq(target: QSeries, basis: Sequence[BasisElement], N: int) -> QSeries:
    """A non-zero residual witnessing refutation: fit the longest consistent prefix."""
    lo, hi = 0, N
    best = {}
    while lo <= hi:
        mid = (lo + hi) // 2
        cols = [b.series.truncate(mid).coeffs for b in basis]
        x, _ = linalg.solve(cols, target.truncate(mid).coeffs)
        if x is None:
            hi = mid - 1
        else:
            best = {b.label: c for b, c in zip(basis, x)}
            lo = mid + 1
    return residual(target, basis, best, N)


def find_relations(basis: Sequence[BasisElement], N: int, margin: int = DEFAULT_MARGIN) -> list[dict[str, mpq]]:
    """Candidate linear relations among ``basis`` valid to q-order ``N``."""
    if N + 1 < len(basis) + margin:
        warnings.warn("too few coefficients for reliable relation search", RuntimeWarning, stacklevel=2)
    cols = [b.series.truncate(N).coeffs for b in basis]
    return [{b.label: c for b, c in zip(basis, v) if c} for v in linalg.nullspace(cols)]


# ---------------------------------------------------------------------------
# weighted membership of ring coefficients
# ---------------------------------------------------------------------------


@dataclass
class MonomialReport:
    monomial: str
    degree: int
    ungraded_degree: int
    certificate: SpanCertificate
    degree_ok: bool

    @property
    def passed(self) -> bool:
        return self.certificate.member and self.degree_ok

    def to_json(self) -> dict:
        return {"monomial": self.monomial, "degree": self.degree, "ungraded_degree": self.ungraded_degree,
                "passed": self.passed, "certificate": self.certificate.to_json()}


@dataclass
class MembershipReport:
    family: FamilyTag
    rule: str
    q_order: int
    entries: list[MonomialReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[MonomialReport]:
        return [e for e in self.entries if not e.passed]

    def to_json(self) -> dict:
        return {"family": str(self.family), "rule": self.rule, "q_order": self.q_order, "passed": self.passed,
                "count": len(self.entries), "entries": [e.to_json() for e in self.entries]}


def all_monomials(ring):
    """Exponent vectors within the ring's degree bounds, graded order."""
    nv = len(ring.formal_vars)
    out = []
    top = ring.D * (2 if ring.ungraded else 1)
    for total in range(top + 1):
        for combo in itertools.combinations_with_replacement(range(nv), total):
            e = [0] * nv
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return [e for e in out if ring.degree(e) <= ring.D and ring.ungraded_degree(e) <= ring.D]


def _express_quiet(args) -> SpanCertificate:
    target, basis, N, margin = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return express(target, basis, N, margin)


def verify_weighted_membership(p: RingElement, family, weight_rule: str = "exact", N: int | None = None,
                               presentation: str = "bracket", margin: int = DEFAULT_MARGIN,
                               check_ungraded: bool = True, include_zero: bool = True,
                               workers: int = 1) -> MembershipReport:
    """Check every coefficient of ``p`` against the family basis of matching weight.

    The weight of a monomial is its degree in the graded formal variables.
    With ``check_ungraded`` the degree in the ungraded variables (``a``,
    ``b``) must not exceed that weight.  The solves are independent, so
    ``workers > 1`` spreads them over a process pool; results are identical.
    """
    if p.y_vars:
        raise ValueError("element carries y-variables; take the y^0 coefficient first")
    family = FamilyTag(family)
    N = p.N if N is None else N
    ring = p.ring
    stored = {f for (f, _), _ in p.items()}
    monos = all_monomials(ring) if include_zero else sorted(stored, key=lambda e: (ring.degree(e), e))
    max_w = max((ring.degree(e) for e in monos), default=0)
    full = enumerate_basis(family, max_w, N, presentation)
    by_weight = {w: select_weight(full, w, weight_rule) for w in {ring.degree(e) for e in monos}}
    jobs = []
    for e in monos:
        target = p.coefficient(e).y0_part() if e in stored else QSeries.zero(N)
        jobs.append((target.truncate(N), by_weight[ring.degree(e)], N, margin))
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            certs = list(pool.map(_express_quiet, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        certs = [_express_quiet(j) for j in jobs]
    report = MembershipReport(family, weight_rule, N)
    for e, job, cert in zip(monos, jobs, certs):
        w, u = ring.degree(e), ring.ungraded_degree(e)
        deg_ok = (u <= w or job[0].is_zero()) if check_ungraded else True
        report.entries.append(MonomialReport(format_monomial(e, ring.formal_vars), w, u, cert, deg_ok))
    return report


__all__ = ["BasisElement", "SpanCertificate", "enumerate_basis", "select_weight", "express", "residual",
           "find_relations", "verify_weighted_membership", "MembershipReport", "MonomialReport", "all_monomials",
           "DEFAULT_MARGIN"]
