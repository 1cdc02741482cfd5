from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entangled_t1.dyadic import DyadicCube, DyadicInterval, DyadicRational, interval_halves, pow2, square
from entangled_t1.errors import IrrationalResult, MixedBases
from entangled_t1.radical import RadicalValue, radical_product
from entangled_t1.step import StepFunction, tensor

intervals = st.builds(DyadicInterval, st.integers(-6, 8), st.integers(-50, 50))
dyadics = st.builds(DyadicRational, st.integers(-10**6, 10**6), st.integers(-20, 20))


@pytest.mark.parametrize("k,l,left,right", [
    (0, 0, (1, 0), (1, 1)),
    (1, 3, (2, 6), (2, 7)),
    (-1, -1, (0, -2), (0, -1)),
])
def test_interval_halves(k, l, left, right):
    a, b = interval_halves(DyadicInterval(k, l))
    assert (a.scale, a.index) == left
    assert (b.scale, b.index) == right


@given(intervals)
def test_parent_child_round_trip(I):
    assert I.children()[0].parent() == I
    assert I.children()[1].parent() == I
    assert I.parent().contains(I)


@given(intervals, intervals)
def test_nested_or_disjoint(I, J):
    states = [not I.intersects(J), I.contains(J), J.contains(I)]
    if I == J:
        assert states == [False, True, True]
    else:
        assert sum(states) == 1


@given(dyadics, dyadics)
def test_dyadic_rational_exact(a, b):
    assert (a + b) - b == a
    assert (a * b).to_fraction() == a.to_fraction() * b.to_fraction()
    m = (a * b).mantissa
    assert m == 0 or m % 2 == 1


def test_dyadic_rational_canonical():
    q = DyadicRational(12, -3)
    assert (q.mantissa, q.exponent) == (3, -1)
    assert DyadicRational(0, 5).exponent == 0
    assert q.to_fraction() == Fraction(3, 2)
    assert pow2(-2) == Fraction(1, 4)


def test_cube_scales_and_measure():
    Q = square(1, 0, 1)
    assert Q.measure == Fraction(1, 4)
    assert len(Q.children()) == 4
    assert all(Q.contains(c) for c in Q.children())
    assert Q.parent() == square(0, 0, 0)
    with pytest.raises(ValueError):
        DyadicCube((DyadicInterval(0, 0), DyadicInterval(1, 0)))


# averages and Haar pairings

ONE = DyadicInterval(0, 0)


def test_average_examples():
    one = StepFunction.indicator([ONE])
    assert one.average({0: ONE}) == 1
    assert StepFunction.haar(ONE).average({0: ONE}) == 0
    F = StepFunction.from_values(1, (0, 0), np.array([[1, 2], [3, 4]]))
    g = F.average({0: ONE})
    assert [g.value_at((j,)) for j in (0, 1)] == [2, 3]


def test_haar_average_examples():
    assert StepFunction.haar(ONE).haar_average(0, ONE) == 1
    assert StepFunction.indicator([ONE]).haar_average(0, ONE) == 0
    assert StepFunction.indicator([DyadicInterval(1, 0)]).haar_average(0, ONE) == Fraction(1, 2)


def test_tensor_examples():
    one = StepFunction.indicator([ONE])
    assert tensor(one, one).equals(StepFunction.indicator(square(0, 0, 0)))
    hf = tensor(StepFunction.haar(ONE), one)
    assert hf.value_at((0, 0)) == 1 and hf.value_at((1, 1)) == -1
    f = StepFunction.from_values(1, (0,), np.array([1, 2]))
    g = StepFunction.from_values(1, (0,), np.array([3, 5]))
    fg = tensor(f, g)
    assert [fg.value_at(i) for i in ((0, 0), (0, 1), (1, 0), (1, 1))] == [3, 5, 6, 10]


step1d = st.builds(
    lambda vals, off, den: StepFunction.from_values(2, (off,), np.array(vals, dtype=object) / den),
    st.lists(st.integers(-5, 5), min_size=1, max_size=8),
    st.integers(-4, 4),
    st.integers(1, 4).map(Fraction),
)


@given(step1d, st.integers(-1, 2), st.integers(-3, 3))
def test_haar_pairing_is_half_difference_of_child_means(f, k, l):
    I = DyadicInterval(k, l)
    a, b = I.children()
    assert f.haar_average(0, I) == (f.average({0: a}) - f.average({0: b})) / 2


@given(step1d, step1d, st.integers(-1, 2), st.integers(-3, 3))
def test_refinement_invariance(f, g, k, l):
    I = DyadicInterval(k, l)
    fg = f * g
    assert fg.average({0: I}) == (f.refine(4) * g.refine(5)).average({0: I})
    assert f.refine(5).integral() == f.integral()


@given(step1d)
def test_text_round_trip(f):
    assert StepFunction.from_text(f.to_text()).equals(f)


def test_radical_product_examples():
    h = Fraction(1, 2)
    assert radical_product([RadicalValue(Fraction(4, 3), h)] * 2) == Fraction(4, 3)
    assert radical_product([RadicalValue(2, Fraction(1, 3))] * 3) == 2
    with pytest.raises(MixedBases):
        radical_product([RadicalValue(2, h), RadicalValue(3, h)])
    with pytest.raises(IrrationalResult):
        radical_product([RadicalValue(2, h)])
    assert radical_product([RadicalValue(4, h)]) == 2
