import math

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import brute_bibracket, brute_bracket, qs
from qzk.series import QSeries, UPoly
from qzk.special import (BiBracketIndex, BracketIndex, FamilyTag, bernoulli, bibracket, bibracket_eulerian,
                         bibracket_indices, bracket, bracket_indices, divisor_sigma_series, eisenstein,
                         eulerian_numerator, family_contains, q_odd_numerator, zvalue)


@pytest.mark.parametrize("s,expect", [(1, [0, 1]), (2, [0, 1]), (3, [0, 1, 1])])
def test_eulerian_small(s, expect):
    assert eulerian_numerator(s) == UPoly(expect)


@pytest.mark.parametrize("s", range(1, 9))
def test_eulerian_against_closed_form(s):
    # sum_d d^n t^d = t A_n(t) / (1-t)^(n+1), A(n, k) = sum_j (-1)^j C(n+1, j) (k+1-j)^n
    n = s - 1
    A = [sum((-1) ** j * math.comb(n + 1, j) * (k + 1 - j) ** n for j in range(k + 1)) for k in range(max(n, 1))]
    assert eulerian_numerator(s) == UPoly([0] + A)


def test_bernoulli_values():
    assert (bernoulli(2), bernoulli(3), bernoulli(4)) == (mpq(1, 6), 0, mpq(-1, 30))


@pytest.mark.parametrize("i", [0] + list(range(2, 21)))
def test_bernoulli_against_sympy(i):
    assert bernoulli(i) == mpq(str(sympy.bernoulli(i)))


def test_bracket_examples():
    assert bracket((1,), 6) == qs(0, 1, 2, 2, 3, 2, 4)
    assert bracket((2,), 6) == qs(0, 1, 3, 4, 7, 6, 12)
    assert bracket((), 6) == QSeries.one(6)


def test_bibracket_examples():
    assert bibracket(((2,), (1,)), 5) == qs(0, 1, 4, 6, 12, 10)
    expect = {}
    for u in range(1, 5):
        for v in range(1, 5 // u + 1):
            expect[u * v] = expect.get(u * v, 0) + mpq(u * v * v, 2)
    assert bibracket(((3,), (1,)), 4) == QSeries.from_dict(expect, 4)


@pytest.mark.parametrize("s", range(1, 5))
def test_bibracket_with_zero_r_is_bracket(s):
    assert bibracket(((s,), (0,)), 12) == bracket((s,), 12)


@pytest.mark.parametrize("s", [(1,), (3,), (2, 1), (1, 1, 1), (3, 2), (2, 1, 2)])
def test_bracket_against_brute_force(s):
    assert bracket(s, 14) == brute_bracket(s, 14)


@pytest.mark.parametrize("w", range(1, 6))
def test_bibracket_dual_formulas(w):
    for idx in bibracket_indices(w):
        assert bibracket(idx, 16) == bibracket_eulerian(idx, 16), str(idx)


@given(st.lists(st.tuples(st.integers(1, 3), st.integers(0, 2)), min_size=1, max_size=3))
def test_bibracket_against_brute_force(parts):
    s, r = zip(*parts)
    assert bibracket((s, r), 10) == brute_bibracket(s, r, 10)


@given(st.lists(st.integers(1, 4), max_size=3), st.integers(0, 12), st.integers(0, 12))
def test_truncation_prefix_stability(s, n1, n2):
    lo, hi = sorted((n1, n2))
    assert bracket(tuple(s), hi).truncate(lo) == bracket(tuple(s), lo)


def test_z_identities():
    N = 30
    assert zvalue((2,), N) == bracket((2,), N)
    assert zvalue((3,), N) == bracket((3,), N).scale(2)
    assert zvalue((4,), N) == bracket((4,), N) - bracket((2,), N).scale(mpq(1, 6))


def test_zvalue_rejects_small_entries():
    with pytest.raises(ValueError):
        zvalue((1,), 5)


def test_q_odd_numerators():
    assert q_odd_numerator(2) == UPoly([0, 1])
    assert q_odd_numerator(3) == UPoly([0, 1, 1])
    assert q_odd_numerator(4) == UPoly([0, 0, 1])


def test_divisor_sigma():
    assert divisor_sigma_series(3, 6) == qs(0, 1, 9, 28, 73, 126, 252)


@pytest.mark.parametrize("k,const", [(2, mpq(-1, 24)), (4, mpq(1, 1440)), (6, mpq(-1, 60480))])
def test_eisenstein_constants(k, const):
    assert eisenstein(k, 5).coeffs[0] == const


def test_eisenstein_identities():
    N = 30
    Z = lambda s: zvalue((s,), N)
    one = QSeries.one(N)
    assert eisenstein(2, N) == one.scale(mpq(-1, 24)) + Z(2)
    assert eisenstein(4, N) == one.scale(mpq(1, 1440)) + Z(2).scale(mpq(1, 6)) + Z(4)
    assert eisenstein(6, N) == (one.scale(mpq(-1, 60480)) + Z(2).scale(mpq(1, 120)) + Z(4).scale(mpq(1, 4))
                                + Z(6))


def test_literal_g4_with_swapped_coefficients_fails():
    N = 10
    Z = lambda s: zvalue((s,), N)
    literal = QSeries.one(N).scale(mpq(1, 1440)) + Z(2) + Z(4).scale(mpq(1, 6))
    assert eisenstein(4, N) != literal


def test_index_weights_and_families():
    assert BracketIndex((3, 1)).weight == 4
    b = BiBracketIndex((3, 1), (1, 0))
    assert (b.weight, b.depth, str(b)) == (5, 2, "[3,1;1,0]")
    assert not BiBracketIndex((1,), (1,)).in_qBD
    assert family_contains(FamilyTag("BD"), FamilyTag("qBD"))
    assert not family_contains(FamilyTag("qMZV"), FamilyTag("MD"))


def test_index_enumeration():
    assert [str(i) for i in bracket_indices(2)] == ["[2]", "[1,1]"]
    assert [str(i) for i in bibracket_indices(2, qbd_only=True)] == ["[2;0]"]
