import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from entangled_t1.dyadic import DyadicInterval, square, unit_square
from entangled_t1.errors import EdgeNotInGraph, InvalidFamily
from entangled_t1.generators import random_field, random_family, random_perfect_kernel, random_step
from entangled_t1.graph import Signature, box_graph, cup_graph, star_graph
from entangled_t1.kernel import PerfectKernel, counterexample_kernel
from entangled_t1.paraproduct import combined_bmo_squared, kernel_from_fields
from entangled_t1.step import StepFunction, tensor
from entangled_t1.t1 import (
    bmo_report, bmo_seminorm_squared, local_constancy_check, modulation_invariance_check,
    necessity_inequalities, restricted_test, squares_in, t1_bmo, trivial_family, weak_boundedness_scan,
)

ONE = DyadicInterval(0, 0)
one = StepFunction.indicator([ONE])
haar = StepFunction.haar(ONE)
unit4 = StepFunction.indicator(tuple([ONE] * 4))


def brute_bmo(F, lo=-6):
    """Mean oscillation squared over every square meeting the support, scales ``lo .. scale - 1``."""
    best = Fraction(0)
    box = F.support_box()
    if box is None:
        return best
    for k in range(lo, F.scale):
        w = 1 << (F.scale - k)
        for i in range(box[0][0] // w - 1, -(-box[0][1] // w) + 1):
            for j in range(box[1][0] // w - 1, -(-box[1][1] // w) + 1):
                Q = square(k, i, j)
                b = {0: Q.intervals[0], 1: Q.intervals[1]}
                osc = (F * F).average(b) - F.average(b) ** 2
                best = max(best, osc)
    return best


def test_bmo_examples():
    assert bmo_seminorm_squared(StepFunction.constant(5, square(0, 0, 0))) == Fraction(3, 16) * 25
    hf = tensor(haar, one)
    rep = bmo_report(hf)
    assert rep.value == 1 and rep.witness == square(0, 0, 0)
    assert bmo_seminorm_squared(StepFunction.zero(2, 0)) == 0


@given(st.integers(0, 10**6))
def test_bmo_matches_brute_force(seed):
    rng = random.Random(seed)
    F = random_step(rng, 2, ((-2, 3), (0, 4)), density=0.7)
    assert bmo_seminorm_squared(F) == brute_bmo(F)


@given(st.integers(0, 10**6), st.integers(-2, 2))
def test_bmo_invariances(seed, t):
    rng = random.Random(seed)
    F = random_step(rng, 2, ((0, 4), (0, 4)))
    v = bmo_seminorm_squared(F)
    c = Fraction(rng.randint(-7, 7), rng.randint(1, 5))
    assert bmo_seminorm_squared(F * c) == c * c * v
    assert bmo_seminorm_squared(F, constant=c) == v
    assert bmo_seminorm_squared(F.dilate(abs(t))) == v
    assert bmo_seminorm_squared(F.translate((4 * t, -4 * t))) == v


def test_t1_bmo_equals_coefficient_bmo():
    rng = random.Random(8)
    g = cup_graph()
    for edge in g.sorted_edges():
        u, v = edge
        sigs = [Signature.from_sets(2, 2, S, T) for S, T in (((), (v,)), ((u,), ()), ((u,), (v,)))]
        for _ in range(3):
            fields = [random_field(rng, s, (0, 1, 2), 3, spill=1) for s in sigs]
            K = kernel_from_fields(2, 2, fields)
            rep = t1_bmo(K, g, edge)
            assert rep.box_independent
            assert rep.bmo_squared == combined_bmo_squared(fields)[0]


def test_t1_bmo_zero_and_counterexample():
    g = cup_graph()
    assert t1_bmo(PerfectKernel(2, 2, StepFunction.zero(4, 0)), g, (1, 1)).bmo_squared == 0
    for r in (1, 2, 3):
        K = counterexample_kernel(r, 2)
        for j in (1, 2):
            rep = t1_bmo(K, star_graph(2), (1, j))
            assert rep.bmo_squared == 2 - Fraction(2) ** (1 - r) and rep.box_independent
    with pytest.raises(EdgeNotInGraph):
        t1_bmo(K, star_graph(2), (1, 3))


def test_wbp_examples():
    assert weak_boundedness_scan(PerfectKernel(2, 2, StepFunction.zero(4, 0)), unit_square(), 3).max_ratio == 0
    for r in (1, 2, 3):
        rep = weak_boundedness_scan(counterexample_kernel(r, 2), unit_square(), 6)
        assert rep.max_ratio == 1 - Fraction(1, 2 ** r) <= 1


def test_wbp_matches_direct_form():
    from entangled_t1.form import form_on_square_indicators
    rng = random.Random(2)
    K = random_perfect_kernel(rng, resolution=2)
    rep = weak_boundedness_scan(K, unit_square(), 3)
    best = max(abs(form_on_square_indicators(K, cup_graph(), Q)) / Q.measure for Q in squares_in(unit_square(), 3))
    assert rep.max_ratio == best


def test_restricted_test_examples():
    g = cup_graph()
    K = PerfectKernel(2, 2, unit4)
    assert restricted_test(K, g, (1, 1), unit_square()) == 1
    assert restricted_test(PerfectKernel(2, 2, StepFunction.zero(4, 0)), g, (1, 1), unit_square()) == 0


def test_counterexample_l1_dominates_form():
    K = counterexample_kernel(2, 2)
    g = star_graph(2)
    rep = necessity_inequalities(K, g, (1, 1), unit_square())
    assert rep.wbp_ok and abs(rep.form) <= rep.l1_test


def test_modulation_examples():
    g = cup_graph()
    rng = random.Random(1)
    K = random_perfect_kernel(rng, resolution=2)
    Q = square(1, 0, 1)
    assert modulation_invariance_check(trivial_family(g, Q), K, g, (1, 1)) == (True, 0)
    I, J = Q.intervals
    fam = trivial_family(g, Q)
    fam.a[(1, 1)] = fam.a[(1, 2)] = StepFunction.haar(I)
    assert modulation_invariance_check(fam, K, g, (2, 1))[0]
    for _ in range(5):
        fam = random_family(rng, g, Q, depth=2, signs_only=True)
        assert modulation_invariance_check(fam, K, g, (1, 2)) == (True, 0)


def test_invalid_family_rejected():
    g = cup_graph()
    Q = unit_square()
    fam = trivial_family(g, Q)
    fam.a[(1, 1)] = haar
    with pytest.raises(InvalidFamily):
        fam.validate(g)
    fam = trivial_family(g, Q)
    fam.b[(2, 1)] = StepFunction.indicator([DyadicInterval(0, 1)])
    with pytest.raises(InvalidFamily):
        modulation_invariance_check(fam, PerfectKernel(2, 2, unit4), g, (1, 1))


def test_local_constancy_examples():
    g = cup_graph()
    assert local_constancy_check(PerfectKernel(2, 2, StepFunction.zero(4, 0)), g, (1, 1), unit_square())[0]
    assert local_constancy_check(counterexample_kernel(2, 2), star_graph(2), (1, 2), unit_square()) == (True, 0)


@given(st.integers(0, 10**6), st.sampled_from([cup_graph(), box_graph()]))
def test_local_constancy_and_necessity_property(seed, g):
    rng = random.Random(seed)
    K = random_perfect_kernel(rng, resolution=2, shift=rng.random() < 0.3)
    edge = rng.choice(g.sorted_edges())
    Q = square(rng.randint(0, 2), 0, 0)
    Q = square(Q.scale, rng.randrange(1 << Q.scale), rng.randrange(1 << Q.scale))
    assert local_constancy_check(K, g, edge, Q) == (True, 0)
    assert necessity_inequalities(K, g, edge, Q).ok


def test_squares_in_counts():
    assert len(list(squares_in(unit_square(), 2))) == 1 + 4 + 16
