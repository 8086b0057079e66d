"""Named verification runs shared by the CLI, the selftest and the test suite.

Each runner returns a :class:`TheoremReport`; ``passed`` is the only thing
callers need to branch on, ``to_json`` is what gets printed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from gmpy2 import mpq

from .products import TraceSpec, build_trace, y0_coefficient
from .series import QSeries
from .span import verify_weighted_membership
from .special import bibracket, bracket, eisenstein, zvalue

# q-orders chosen so every solve has at least `margin` spare equations
DEFAULT_ORDERS = {"lemma31": 20, "thm32": 40, "thm45": 24, "thm54": 24, "bo": 20, "zids": 40, "eisenstein": 40}
DEFAULT_DEGREES = {"lemma31": 4, "thm32": 3, "thm45": 4, "thm54": 3, "bo": 6}


@dataclass
class TheoremReport:
    theorem: str
    q_order: int
    passed: bool
    details: dict = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "q_order": self.q_order, "passed": self.passed, **self.details}

    def to_text(self) -> str:
        head = f"{self.theorem}: {'PASS' if self.passed else 'FAIL'} (q-order {self.q_order})"
        return "\n".join([head] + ["  " + ln for ln in self.lines])


def _membership_lines(rep) -> list[str]:
    out = []
    for e in rep.entries:
        coords = ", ".join(f"{v}*{k}" for k, v in e.certificate.coordinates.items() if v) or "0"
        flag = "ok" if e.passed else "FAIL"
        out.append(f"{e.monomial:<24} w={e.degree} {flag:<4} {coords}")
    return out


def _membership(name, p, family, rule, N, margin, workers, check_ungraded=True) -> TheoremReport:
    rep = verify_weighted_membership(p, family, rule, N, margin=margin, check_ungraded=check_ungraded,
                                     workers=workers)
    weak = sum(1 for e in rep.entries if e.certificate.underdetermined)
    details = rep.to_json()
    details["underdetermined"] = weak
    details["nonzero"] = sum(1 for e in rep.entries if e.certificate.coordinates and
                             any(e.certificate.coordinates.values()))
    return TheoremReport(name, N, rep.passed, details, _membership_lines(rep))


def verify_lemma31(N=None, D=None, Y=None, margin=10, workers=1, budget_terms=None) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["lemma31"]
    D = D if D is not None else DEFAULT_DEGREES["lemma31"]
    p = build_trace(TraceSpec("lemma31", N, D, Y), budget_terms)
    rep = _membership("lemma31", p, "qMZV", "exact", N, margin, workers)
    const = p.coefficient((0, 0)).y0_part()
    rep.details["constant_term_is_one"] = const == QSeries.one(N)
    rep.passed = rep.passed and rep.details["constant_term_is_one"]
    return rep


def verify_thm32(r: int, N=None, D=None, Y=None, margin=10, workers=1, budget_terms=None) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["thm32"]
    D = D if D is not None else DEFAULT_DEGREES["thm32"]
    p = build_trace(TraceSpec("theorem32", N, D, Y, r=r), budget_terms)
    rep = _membership(f"thm32:{r}", p, "qMZV", "exact", N, margin, workers)
    const = p.coefficient((0,) * len(p.ring.formal_vars)).y0_part()
    rep.details["constant_term_is_one"] = const == QSeries.one(N)
    rep.passed = rep.passed and rep.details["constant_term_is_one"]
    return rep


def _pn_y0(N, D, Y, with_ab, budget_terms):
    p = build_trace(TraceSpec("trace_PN", N, D, Y, players=2, with_ab=with_ab), budget_terms)
    y0 = y0_coefficient(p)
    if not with_ab:
        # the single-player variables only enter through the a, b factors
        y0 = y0.specialize_zero([v for v in y0.ring.formal_vars if "_" not in v])
    return y0


def verify_thm45(N=None, D=None, Y=None, margin=10, workers=1, budget_terms=None) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["thm45"]
    D = D if D is not None else DEFAULT_DEGREES["thm45"]
    y0 = _pn_y0(N, D, Y, False, budget_terms)
    rep = _membership("thm45", y0, "qBD", "at_most", N, margin, workers)
    if D >= 4:
        e = tuple(1 if v in ("z1_12", "z2_12", "v1_12", "v2_12") else 0 for v in y0.ring.formal_vars)
        got = y0.coefficient(e).y0_part()
        ok = got == bibracket(((3,), (1,)), N).scale(2)
        rep.details["z1z2v1v2_equals_2_bibracket_3_1"] = ok
        rep.passed = rep.passed and ok
    return rep


def verify_thm54(players: int = 2, N=None, D=None, Y=None, margin=10, workers=1, budget_terms=None) -> TheoremReport:
    if players != 2:
        raise ValueError("only the two-player trace is supported at desk scale")
    N = N if N is not None else DEFAULT_ORDERS["thm54"]
    D = D if D is not None else DEFAULT_DEGREES["thm54"]
    y0 = _pn_y0(N, D, Y, True, budget_terms)
    return _membership(f"thm54:{players}", y0, "BD", "at_most", N, margin, workers)


def verify_bo_parity(N=None, D=None, Y=None, budget_terms=None, **_) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["bo"]
    D = D if D is not None else DEFAULT_DEGREES["bo"]
    p = build_trace(TraceSpec("bloch_okounkov", N, D, Y), budget_terms)
    odd = [m for m in range(1, D + 1, 2) if not p.coefficient((m,)).y0_part().is_zero()]
    even = [m for m in range(0, D + 1, 2) if not p.coefficient((m,)).y0_part().is_zero()]
    lines = [f"z^{m}: {'zero' if m % 2 and m not in odd else p.coefficient((m,)).y0_part()!r}"
             for m in range(D + 1)]
    return TheoremReport("bo", N, not odd, {"degree": D, "nonzero_odd": odd, "nonzero_even": even}, lines)


# ---------------------------------------------------------------------------
# closed-form identities
# ---------------------------------------------------------------------------


def _identity_rows(rows: list[tuple[str, QSeries, QSeries]]) -> tuple[bool, list[dict], list[str]]:
    out, lines, ok = [], [], True
    for name, lhs, rhs in rows:
        eq = lhs == rhs
        ok &= eq
        out.append({"identity": name, "holds": eq})
        lines.append(f"{'ok  ' if eq else 'FAIL'} {name}")
    return ok, out, lines


def z_identities(N: int) -> list[tuple[str, QSeries, QSeries]]:
    b = lambda *s: bracket(s, N)
    return [
        ("Z(2) = [2]", zvalue((2,), N), b(2)),
        ("Z(3) = 2[3]", zvalue((3,), N), b(3).scale(2)),
        ("Z(4) = [4] - 1/6 [2]", zvalue((4,), N), b(4) - b(2).scale(mpq(1, 6))),
    ]


def eisenstein_identities(N: int, literal_g4: bool = False) -> list[tuple[str, QSeries, QSeries]]:
    """``G_2, G_4, G_6`` in Z-values.

    The corrected ``G_4`` has coefficients 1/6 on Z(2) and 1 on Z(4); the
    literal variant swaps them and does not hold.
    """
    Z = lambda s: zvalue((s,), N)
    one = QSeries.one(N)
    g4 = (Z(2) + Z(4).scale(mpq(1, 6)) if literal_g4 else Z(2).scale(mpq(1, 6)) + Z(4))
    name4 = "G4 = 1/1440 + Z(2) + 1/6 Z(4)" if literal_g4 else "G4 = 1/1440 + 1/6 Z(2) + Z(4)"
    return [
        ("G2 = -1/24 + Z(2)", eisenstein(2, N), one.scale(mpq(-1, 24)) + Z(2)),
        (name4, eisenstein(4, N), one.scale(mpq(1, 1440)) + g4),
        ("G6 = -1/60480 + 1/120 Z(2) + 1/4 Z(4) + Z(6)", eisenstein(6, N),
         one.scale(mpq(-1, 60480)) + Z(2).scale(mpq(1, 120)) + Z(4).scale(mpq(1, 4)) + Z(6)),
    ]


def verify_zids(N=None, **_) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["zids"]
    ok, rows, lines = _identity_rows(z_identities(N))
    return TheoremReport("zids", N, ok, {"identities": rows}, lines)


def verify_eisenstein(N=None, **_) -> TheoremReport:
    N = N if N is not None else DEFAULT_ORDERS["eisenstein"]
    ok, rows, lines = _identity_rows(eisenstein_identities(N))
    return TheoremReport("eisenstein", N, ok, {"identities": rows}, lines)


def parse_theorem(text: str) -> tuple[str, Callable[..., TheoremReport], dict]:
    """Map ``lemma31``, ``thm32:R``, ``thm45``, ``thm54:N``, ``bo``, ``zids``, ``eisenstein`` to a runner."""
    t = text.strip().lower()
    if t == "lemma31":
        return t, verify_lemma31, {}
    if t.startswith("thm32:"):
        r = int(t.split(":", 1)[1])
        if r < 1:
            raise ValueError("thm32 needs r >= 1")
        return t, verify_thm32, {"r": r}
    if t == "thm45":
        return t, verify_thm45, {}
    if t.startswith("thm54:"):
        return t, verify_thm54, {"players": int(t.split(":", 1)[1])}
    if t == "bo":
        return t, verify_bo_parity, {}
    if t == "zids":
        return t, verify_zids, {}
    if t == "eisenstein":
        return t, verify_eisenstein, {}
    raise ValueError(f"unknown theorem {text!r}")


__all__ = ["TheoremReport", "verify_lemma31", "verify_thm32", "verify_thm45", "verify_thm54",
           "verify_bo_parity", "verify_zids", "verify_eisenstein", "z_identities", "eisenstein_identities",
           "parse_theorem", "DEFAULT_ORDERS", "DEFAULT_DEGREES"]
