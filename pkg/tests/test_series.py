import math

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import qs
from qzk.series import (QSeries, Ring, RingElement, UPoly, as_rational, bell_coefficient, exp_linear,
                        exp_truncated, format_monomial, integer_partitions, parse_monomial, qs_geometric)

rationals = st.builds(lambda a, b: mpq(a, b), st.integers(-5, 5), st.integers(1, 4))


@st.composite
def qseries(draw, N=None):
    N = draw(st.integers(0, 8)) if N is None else N
    return QSeries(draw(st.lists(rationals, min_size=N + 1, max_size=N + 1)), N)


@st.composite
def elements(draw, ring, nilpotent=False):
    nf, ny = len(ring.formal_vars), len(ring.y_vars)
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        f = tuple(draw(st.lists(st.integers(0, ring.D), min_size=nf, max_size=nf)))
        if sum(f) > ring.D:
            continue
        y = tuple(draw(st.lists(st.integers(-1, 1), min_size=ny, max_size=ny)))
        s = draw(qseries(ring.N))
        if nilpotent and sum(f) == 0:
            s = s.shift(1).truncate(ring.N)
        terms[(f, y)] = terms[(f, y)] + s if (f, y) in terms else s
    return RingElement(ring, terms)


RING = Ring(("z", "w"), ("y",), N=4, D=3, Y=3)
RING0 = Ring(("z", "w"), (), N=4, D=3)


# -- QSeries -----------------------------------------------------------------


def test_difference_of_squares():
    assert qs(1, 1, N=2) * qs(1, -1, N=2) == qs(1, 0, -1)


def test_geometric_sum_times_one_minus_q():
    N = 7
    geo = QSeries([1] * (N + 1), N)
    assert geo * qs(1, -1, N=N) == QSeries.one(N)


@pytest.mark.parametrize("d,c,N,expect", [
    (1, 1, 4, {1: 1, 2: 1, 3: 1, 4: 1}),
    (2, 0, 5, {0: 1, 2: 1, 4: 1}),
    (3, 2, 9, {6: 1, 9: 1}),
])
def test_geometric_examples(d, c, N, expect):
    assert qs_geometric(d, c, N) == QSeries.from_dict(expect, N)


def test_mismatched_orders_take_minimum():
    a, b = QSeries.one(9), QSeries.one(4)
    assert (a + b).N == 4 and (a * b).N == 4


def test_float_coefficients_rejected():
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_inverse_needs_unit_constant():
    with pytest.raises(ZeroDivisionError):
        qs(0, 1, 1).inverse()


@given(qseries())
def test_scale_by_zero(s):
    assert s.scale(0).is_zero()


@given(qseries(6), qseries(6), qseries(6))
def test_qseries_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(qseries(6).filter(lambda s: s.coeffs[0] != 0))
def test_inverse_roundtrip(s):
    assert s * s.inverse() == QSeries.one(6)


@given(qseries(8), qseries(8), st.integers(0, 8))
def test_truncation_commutes_with_product(a, b, k):
    assert (a * b).truncate(k) == a.truncate(k) * b.truncate(k)


@given(qseries())
def test_qseries_json_roundtrip(s):
    assert QSeries.from_json(s.to_json()) == s


def test_json_is_fraction_strings():
    assert qs(mpq(-1, 6), 3).to_json() == {"N": 1, "coeffs": ["-1/6", "3"]}


# -- UPoly ---------------------------------------------------------------------


def test_upoly_repr_and_eval():
    p = UPoly([1, -1, 0, 3])
    assert repr(p) == "1 - t + 3*t^3"
    assert p(2) == 1 - 2 + 24


def test_upoly_compose():
    p, q = UPoly([0, 0, 1]), UPoly([1, 1])
    assert p.compose(q) == UPoly([1, 2, 1])


# -- monomial strings -------------------------------------------------------------


@pytest.mark.parametrize("text,names,exps", [
    ("z1^2*w1", ("z1", "w1"), (2, 1)),
    ("1", ("z", "w"), (0, 0)),
    ("y1^2*y2^-2", ("y1", "y2"), (2, -2)),
])
def test_monomial_strings(text, names, exps):
    neg = any(e < 0 for e in exps)
    assert parse_monomial(text, names, allow_negative=neg) == exps
    assert format_monomial(exps, names) == text


def test_unknown_variable_rejected():
    with pytest.raises((ValueError, KeyError)):
        parse_monomial("x^2", ("z",))


# -- RingElement --------------------------------------------------------------------


@given(elements(RING), elements(RING), elements(RING))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a + RING.zero() == a
    assert a * RING.one() == a
    assert a - a == RING.zero()


def test_degree_truncation_recorded():
    r = Ring(("z", "w"), (), N=3, D=1)
    p = r.var("z") * r.var("w")
    assert p == r.zero() and p.degree_truncated


def test_laurent_cancellation():
    assert RING.monomial(y={"y": 1}) * RING.monomial(y={"y": -1}) == RING.one()


def test_y_saturation_flag():
    r = Ring((), ("y",), N=3, D=0, Y=2)
    p = r.monomial(y={"y": 2}) * r.monomial(y={"y": 1})
    assert p == r.zero() and p.saturated


def test_y0_part_of_laurent_layer():
    r = Ring((), ("y",), N=2, D=0)
    p = r.monomial(y={"y": 1}) + r.constant(3) + r.monomial(y={"y": -1}, coeff=qs(0, 1, 0))
    assert p.coefficient(()).y0_part() == qs(3, 0, 0)


def test_coefficient_of_constant_one():
    assert RING0.one().coefficient((0, 0)).y0_part() == QSeries.one(4)


def test_out_of_bound_terms_rejected():
    with pytest.raises(ValueError):
        RingElement(RING0, {((4, 0), ()): QSeries.one(4)})


@given(elements(RING))
def test_ring_json_roundtrip(p):
    assert RingElement.from_json(p.to_json()) == p


# -- exponentials ----------------------------------------------------------------------


def test_exp_zero_and_scalar():
    r = Ring(("z",), (), N=3, D=3)
    assert exp_truncated(r.zero()) == r.one()
    z = r.var("z")
    expect = r.one() + z + z * z * mpq(1, 2) + z * z * z * mpq(1, 6)
    assert exp_truncated(z) == expect


def test_exp_rejects_unit_constant():
    r = Ring(("z",), (), N=3, D=3)
    with pytest.raises(ValueError):
        exp_truncated(r.one())


@given(elements(RING0, nilpotent=True), elements(RING0, nilpotent=True))
def test_exp_is_a_homomorphism(p, r):
    assert exp_truncated(p + r) == exp_truncated(p) * exp_truncated(r)


def test_exp_linear_matches_exp_truncated():
    r = Ring(("z", "w"), (), N=2, D=4)
    assert exp_linear(r, {"z": 1, "w": -2}) == exp_truncated(r.var("z") - r.var("w") * 2)


def test_integer_partitions_count():
    assert [sum(1 for _ in integer_partitions(m)) for m in range(1, 9)] == [1, 2, 3, 5, 7, 11, 15, 22]


def test_bell_low_orders():
    f1, f2 = mpq(3), mpq(5)
    assert bell_coefficient([f1], 1) == f1
    assert bell_coefficient([f1, f2], 2) == f2 / 2 + f1 ** 2 / 2


def test_bell_on_log1p():
    # f = log(1 + z): D^t f(0) = (-1)^(t-1) (t-1)!, exp f = 1 + z
    derivs = [mpq((-1) ** (t - 1) * math.factorial(t - 1)) for t in range(1, 5)]
    assert [bell_coefficient(derivs, m) for m in range(1, 5)] == [1, 0, 0, 0]


@given(st.lists(rationals, min_size=5, max_size=5))
def test_bell_matches_exp_extraction(derivs):
    r = Ring(("z",), (), N=0, D=5)
    f = r.zero()
    for t, d in enumerate(derivs, start=1):
        f = f + r.monomial({"z": t}, coeff=d / math.factorial(t))
    e = exp_truncated(f)
    for m in range(1, 6):
        assert e.coefficient((m,)).y0_part() == QSeries([bell_coefficient(derivs, m)], 0)
