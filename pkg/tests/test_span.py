import warnings

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from qzk import linalg
from qzk.products import BudgetExceeded, TraceSpec, build_trace
from qzk.series import QSeries
from qzk.span import enumerate_basis, express, find_relations, select_weight, verify_weighted_membership
from qzk.special import bibracket, bracket, zvalue

entries = st.builds(lambda a, b: mpq(a, b), st.integers(-4, 4), st.integers(1, 3))


@st.composite
def matrices(draw):
    m, n = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    return [draw(st.lists(entries, min_size=m, max_size=m)) for _ in range(n)]


def to_sympy(cols):
    return sympy.Matrix([[sympy.Rational(int(c[i].numerator), int(c[i].denominator)) for c in cols]
                         for i in range(len(cols[0]))])


@given(matrices())
def test_rank_against_sympy(cols):
    assert linalg.rank(cols) == to_sympy(cols).rank()


@given(matrices())
def test_nullspace_against_sympy(cols):
    ns = linalg.nullspace(cols)
    assert len(ns) == len(to_sympy(cols).nullspace())
    for v in ns:
        assert all(sum(c[i] * x for c, x in zip(cols, v)) == 0 for i in range(len(cols[0])))


@given(matrices(), st.data())
def test_solve_consistent_systems(cols, data):
    x0 = data.draw(st.lists(entries, min_size=len(cols), max_size=len(cols)))
    b = [sum(c[i] * x for c, x in zip(cols, x0)) for i in range(len(cols[0]))]
    x, rk = linalg.solve(cols, b)
    assert rk == to_sympy(cols).rank()
    assert [sum(c[i] * v for c, v in zip(cols, x)) for i in range(len(b))] == b


def test_solve_reports_inconsistency():
    assert linalg.solve([[1, 0]], [0, 1])[0] is None


# -- bases ------------------------------------------------------------------------


def labels(basis):
    return sorted(b.label for b in basis)


def test_md_basis_weight_two():
    assert labels(enumerate_basis("MD", 2, 5)) == sorted(["1", "[1]", "[2]", "[1,1]"])


def test_qbd_basis_weight_two():
    assert labels(enumerate_basis("qBD", 2, 5)) == sorted(["1", "[2;0]"])


def test_qm_basis_weight_four():
    assert labels(enumerate_basis("QM", 4, 5)) == sorted(["1", "G2", "G2^2", "G4"])


def test_weight_selection():
    basis = enumerate_basis("MD", 3, 5)
    assert {b.weight for b in select_weight(basis, 2, "exact")} == {2}
    assert {b.weight for b in select_weight(basis, 2, "at_most")} == {0, 1, 2}
    with pytest.raises(ValueError):
        select_weight(basis, 2, "around")


def test_basis_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_basis("BD", 8, 5, budget=10)


# -- express and relations -------------------------------------------------------------


def test_express_z4_in_brackets():
    N = 30
    basis = enumerate_basis("MD", 4, N)
    cert = express(zvalue((4,), N), basis, N)
    assert cert.member and not cert.underdetermined
    assert {k: v for k, v in cert.coordinates.items() if v} == {"[4]": 1, "[2]": mpq(-1, 6)}
    assert cert.residual.is_zero()


def test_express_zero_target():
    basis = enumerate_basis("MD", 2, 20)
    cert = express(QSeries.zero(20), basis, 20)
    assert cert.member and not any(cert.coordinates.values())


def test_refutation_has_nonzero_residual():
    N = 20
    basis = select_weight(enumerate_basis("MD", 2, N), 2, "exact")
    cert = express(bracket((3,), N), basis, N)
    assert cert.status == "refuted_at_order"
    assert not cert.residual.is_zero()


def test_underdetermined_warning():
    basis = enumerate_basis("MD", 4, 8)
    with pytest.warns(RuntimeWarning):
        cert = express(bracket((2,), 8), basis, 8)
    assert cert.underdetermined


def test_zw_coefficient_in_okounkov_presentation():
    N = 20
    p = build_trace(TraceSpec("lemma31", N, 2))
    basis = select_weight(enumerate_basis("qMZV", 2, N, "okounkov"), 2, "exact")
    cert = express(p.coefficient((1, 1)).y0_part(), basis, N)
    assert {k: v for k, v in cert.coordinates.items() if v} == {"Z(2)": -1}


def test_relation_z2_equals_bracket2():
    from qzk.span import BasisElement
    from qzk.special import FamilyTag
    N = 20
    basis = [BasisElement("Z(2)", 2, zvalue((2,), N), FamilyTag("qMZV")),
             BasisElement("[2]", 2, bracket((2,), N), FamilyTag("MD"))]
    rels = find_relations(basis, N)
    assert rels == [{"Z(2)": 1, "[2]": -1}]


def test_no_relation_for_constant():
    assert find_relations(enumerate_basis("MD", 0, 12), 12) == []


def test_candidate_relation_for_bibracket():
    # a solver output, not a theorem: [1;1] expressed through brackets of weight <= 3 to q-order 40
    N = 40
    basis = enumerate_basis("MD", 3, N)
    cert = express(bibracket(((1,), (1,)), N), basis, N)
    assert cert.member
    assert cert.coordinates["[2]"] == 1


# -- membership of ring coefficients -------------------------------------------------------


def test_membership_is_not_vacuous():
    rep = verify_weighted_membership(build_trace(TraceSpec("lemma31", 20, 4)), "qMZV", "exact")
    assert rep.passed and len(rep.entries) == 15
    z2w2 = next(e for e in rep.entries if e.monomial == "z^2*w^2")
    assert {k: v for k, v in z2w2.certificate.coordinates.items() if v} == {"[4]": mpq(-3, 2), "[2]^2": mpq(1, 2)}


def test_okounkov_monomials_miss_exact_weight_four():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = verify_weighted_membership(build_trace(TraceSpec("lemma31", 20, 4)), "qMZV", "exact",
                                         presentation="okounkov")
    assert "z^2*w^2" in {e.monomial for e in rep.failures()}


def test_membership_in_parallel_matches_serial():
    p = build_trace(TraceSpec("lemma31", 20, 3))
    a = verify_weighted_membership(p, "qMZV", "exact")
    b = verify_weighted_membership(p, "qMZV", "exact", workers=2)
    assert a.to_json() == b.to_json()


def test_membership_needs_y0():
    with pytest.raises(ValueError):
        verify_weighted_membership(build_trace(TraceSpec("trace_PN", 4, 2)), "qBD")
