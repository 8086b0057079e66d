import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from conftest import brute_power_sum, brute_sumspec
from qzk.reduction import (BiBracketCombination, Chain, EliminationStats, ReductionError, SumSpec, composition_sum,
                           eliminate, faulhaber, order_decompose, ordered_set_partitions, power_sum_eq, power_sum_le,
                           reduce_sumspec, sumspec_eval)
from qzk.series import QSeries
from qzk.special import BiBracketIndex, bibracket


def test_faulhaber_small():
    assert [faulhaber(0)(n) for n in range(5)] == [0, 1, 2, 3, 4]
    assert all(faulhaber(1)(n) == n * (n + 1) // 2 for n in range(20))
    assert all(faulhaber(3)(n) == sum(k ** 3 for k in range(1, n + 1)) for n in range(51))


@pytest.mark.parametrize("t", range(0, 12))
def test_faulhaber_against_sympy(t):
    n, k = sympy.symbols("n k", integer=True, positive=True)
    ref = sympy.Poly(sympy.summation(k ** t, (k, 1, n)), n)
    assert list(faulhaber(t).coeffs[: t + 2]) == [mpq(str(c)) for c in reversed(ref.all_coeffs())]


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 7))
def test_power_sums_against_loops(ts, n):
    assert power_sum_le(ts)(n) == brute_power_sum(ts, n, False)
    assert power_sum_eq(ts)(n) == brute_power_sum(ts, n, True)


def test_power_sum_examples():
    assert power_sum_le([1])(7) == 28
    assert power_sum_le([1, 1])(3) == 5
    assert all(power_sum_eq([1, 1])(n) == mpq(n * (n * n - 1), 6) for n in range(1, 12))
    assert power_sum_eq([4])(3) == 81
    assert power_sum_le([2, 1])(1) == 0 and power_sum_eq([1, 2, 1])(1) == 0


def test_power_sums_reject_zero_exponents():
    with pytest.raises(ValueError):
        power_sum_le([0, 1])


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.integers(1, 7))
def test_composition_sum_against_loops(ts, n):
    assert composition_sum(tuple(ts))(n) == brute_power_sum(ts, n, True)


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3))
def test_composition_sum_is_power_sum_eq_for_positive_t(ts):
    assert composition_sum(tuple(ts)) == power_sum_eq(ts)


# -- SumSpec and the oracle --------------------------------------------------------


def test_empty_spec_is_one():
    assert sumspec_eval(SumSpec(), 6) == QSeries.one(6)


def test_spec_json_roundtrip():
    s = SumSpec((Chain(((1, 2), (0, 1)), 0, "free", "A"), Chain(((0, 1),), 1, "strict", "B")), "eq")
    assert SumSpec.from_json(s.to_json()) == s


def test_divergent_spec_rejected():
    with pytest.raises(ValueError):
        sumspec_eval(SumSpec((Chain(((0, 0),), 0),)), 5)


@pytest.mark.parametrize("A,B,a0,rel", [
    (((0, 1),), ((0, 1),), 0, "eq"),
    (((1, 0), (0, 2)), ((2, 1),), 0, "eq"),
    (((1, 1),), ((0, 2), (1, 0)), 1, "lt"),
    (((0, 2), (1, 1)), ((1, 1),), 1, "gt"),
])
def test_oracle_against_brute_force(A, B, a0, rel):
    spec = SumSpec((Chain(A, a0, "strict", "A"), Chain(B, 1, "strict", "B")), rel)
    assert sumspec_eval(spec, 12) == brute_sumspec(A, B, a0, rel, 12)


def test_ordered_set_partitions_count():
    # ordered Bell (Fubini) numbers
    assert [sum(1 for _ in ordered_set_partitions(range(n))) for n in range(1, 6)] == [1, 3, 13, 75, 541]


def test_decompose_single_chain_is_identity():
    spec = SumSpec((Chain(((1, 2),), 1, "free"),))
    assert order_decompose(spec) == [(1, SumSpec((Chain(((1, 2),), 1, "strict"),)))]


def test_decompose_free_pair():
    spec = SumSpec((Chain(((0, 1), (0, 1)), 1, "free"),))
    pieces = order_decompose(spec)
    total = QSeries.zero(15)
    for c, piece in pieces:
        assert all(ch.ordering == "strict" for ch in piece.chains)
        total = total + sumspec_eval(piece, 15).scale(c)
    assert total == sumspec_eval(spec, 15)


def test_decompose_preserves_groups():
    spec = SumSpec.W(((0, 1), (1, 1)), ((0, 1), (0, 2)), "free")
    for _, piece in order_decompose(spec):
        assert [c.group for c in piece.chains] == ["A", "B"]


# -- elimination -----------------------------------------------------------------------


def test_basic_elimination():
    spec = SumSpec.W(((0, 1),), ((0, 1),))
    combo = eliminate(spec)
    assert combo.evaluate(15) == bibracket(((3,), (1,)), 15).scale(2)
    assert combo.evaluate(15) == sumspec_eval(spec, 15)


def test_weight_two_elimination():
    spec = SumSpec.W(((0, 0),), ((0, 0),))
    combo = eliminate(spec)
    assert combo.evaluate(15) == sumspec_eval(spec, 15)
    assert combo.max_weight <= spec.weight == 2


def test_empty_group_rejected():
    with pytest.raises(ValueError):
        eliminate(SumSpec.W((), ((0, 1),)))


def test_lt_with_zero_start_rejected():
    with pytest.raises(ValueError):
        eliminate(SumSpec.W(((0, 1),), ((0, 1),), constraint="lt"))


def test_depth_guard():
    with pytest.raises(ReductionError):
        eliminate(SumSpec.W(((1, 1), (0, 1)), ((0, 2), (1, 1))), max_depth=2)


def test_certified_steps_are_counted():
    stats = EliminationStats()
    eliminate(SumSpec.W(((1, 1), (0, 1)), ((0, 2),)), certify_order=10, stats=stats)
    assert stats.certified == stats.nodes > 1


exps = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=3)


@settings(max_examples=30)
@given(exps, exps, st.sampled_from(["eq", "lt", "gt"]), st.booleans())
def test_elimination_against_oracle(A, B, rel, zero_start):
    if len(A) + len(B) > 4:
        B = B[: 4 - len(A)]
    if not B:
        return
    a0 = 0 if zero_start and rel == "eq" else 1
    spec = SumSpec((Chain(tuple(A), a0, "strict", "A"), Chain(tuple(B), 1, "strict", "B")), rel)
    combo = eliminate(spec)
    assert combo.evaluate(10) == sumspec_eval(spec, 10)
    assert combo.max_weight <= spec.weight
    if spec.all_t_positive:
        assert all(i.s[0] >= 2 for i in combo.indices)


short_exps = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=2)


# forcing "mirror" on a long A chain is exponential (a 3+2 shape can take 30 s), so keep both chains short
@settings(max_examples=15)
@given(short_exps, short_exps)
def test_strategies_agree(A, B):
    spec = SumSpec.W(tuple(A), tuple(B))
    fwd, mir = eliminate(spec, "forward"), eliminate(spec, "mirror")
    assert fwd.evaluate(10) == mir.evaluate(10)


def test_reduce_free_chains():
    spec = SumSpec.W(((1, 1),), ((0, 1), (1, 0)), "free")
    combo = reduce_sumspec(spec)
    assert combo.evaluate(15) == sumspec_eval(spec, 15)


def test_combination_arithmetic_and_json():
    a = BiBracketCombination({(BiBracketIndex((2,), (0,)),): 1})
    b = BiBracketCombination({(BiBracketIndex((3,), (1,)),): mpq(-1, 2)})
    c = (a + b).scale(2) - a
    assert repr(c) == "1*[2;0] - 1*[3;1]"
    assert c.to_json()[1] == {"factors": [{"s": [3], "r": [1]}], "coeff": "-1"}
    assert c.evaluate(8) == bibracket(((2,), (0,)), 8) - bibracket(((3,), (1,)), 8)
    assert BiBracketCombination.unit().evaluate(4) == QSeries.one(4)
