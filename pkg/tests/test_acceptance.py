"""Exit criteria, one test per criterion.

Each test records a single PASS/FAIL line (collected again in the terminal
summary) and then asserts, so a red line is also a failing test.
"""

import itertools
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from entangled_t1.contraction import all_order_costs, axis_names, plan_contraction
from entangled_t1.counterexample import (
    CounterexampleConfig, divergence_table, increments_positive, run,
)
from entangled_t1.dyadic import square, unit_square
from entangled_t1.errors import DegenerateGraph
from entangled_t1.form import check_duality, evaluate_form
from entangled_t1.generators import (
    random_family, random_field, random_inputs, random_perfect_kernel, random_step, random_tree,
)
from entangled_t1.graph import (
    BipartiteGraph, Signature, all_signatures, box_graph, check_witness, classify_signature, cup_graph,
    exponent_thresholds, feasibility_witness, figure2_graph, matching_graph, star_graph,
)
from entangled_t1.kernel import PerfectKernel, counterexample_kernel, validate_diagonal_constancy
from entangled_t1.paraproduct import (
    HaarCoefficientField, combined_bmo_squared, haar_decomposition, kernel_from_fields, reconstruct_check,
    single_tree_ratio,
)
from entangled_t1.step import StepFunction
from entangled_t1.t1 import (
    adjoint_on_ones, bmo_seminorm_squared, local_constancy_check, modulation_invariance_check,
    necessity_inequalities, squares_in, t1_bmo,
)

pytestmark = pytest.mark.acceptance

GRAPHS = {"cup": cup_graph(), "box": box_graph()}
PER_GRAPH = 60


@pytest.fixture(scope="module")
def suite():
    """Validated random kernels (m = n = 2, resolution <= 3) with random inputs on both graphs."""
    rng = random.Random(20240601)
    cases = []
    t0 = time.perf_counter()
    for label, g in GRAPHS.items():
        for _ in range(PER_GRAPH):
            K = random_perfect_kernel(rng, resolution=rng.randint(1, 3), per_signature=rng.randint(1, 3),
                                      shift=rng.random() < 0.3)
            s = rng.randint(0, 3)
            w = 1 << s
            box = ((rng.randint(-w, 0), rng.randint(w, 3 * w)), (rng.randint(-w, 0), rng.randint(w, 3 * w)))
            if rng.random() < 0.3:
                # inputs that reach the shifted kernel support
                box = ((-3 * w, 2 * w), (-3 * w, 2 * w))
            fs = random_inputs(rng, g, s, box=box, density=rng.choice((0.5, 1.0)))
            cases.append((label, g, K, fs))
    return cases, time.perf_counter() - t0


def _support_square(K):
    """Smallest dyadic square holding the x- and y-projections of the kernel support."""
    box = K.body.support_box()
    R = K.resolution
    lo = (min(b[0] for b in box[: K.m]), min(b[0] for b in box[K.m:]))
    hi = (max(b[1] for b in box[: K.m]) - 1, max(b[1] for b in box[K.m:]) - 1)
    k = R
    while (lo[0] >> (R - k), lo[1] >> (R - k)) != (hi[0] >> (R - k), hi[1] >> (R - k)):
        k -= 1
    return square(k, lo[0] >> (R - k), lo[1] >> (R - k))


def test_c1_reconstruction(suite, criterion):
    cases, build = suite
    t0 = time.perf_counter()
    bad, invalid = [], 0
    for k, (label, g, K, fs) in enumerate(cases):
        if not validate_diagonal_constancy(K).valid:
            invalid += 1
        rep = reconstruct_check(K, g, fs)
        if len(rep.by_signature) != 15 or rep.residual != 0:
            bad.append(k)
    elapsed = time.perf_counter() - t0 + build
    ok = not bad and not invalid and len(cases) >= 100 and elapsed < 60
    criterion(ok, f"{len(cases)} kernels on cup+box, 15 signatures each, nonzero residuals {len(bad)}, "
                  f"invalid kernels {invalid}, {elapsed:.1f}s")
    assert ok


def test_c2_off_diagonal_vanish(suite, criterion):
    cases, _ = suite
    checked, nonzero = 0, 0
    for _, _, K, _ in cases:
        dec = haar_decomposition(K, full=True)
        checked += dec.off_diagonal_checked
        nonzero += sum(1 for d in dec.off_diagonal.values() for v in d.values() if v != 0)
    ok = nonzero == 0 and checked > 0
    criterion(ok, f"{checked} unequal-interval coefficients examined, {nonzero} nonzero")
    assert ok


def test_c3_duality(suite, criterion):
    cases, _ = suite
    worst, pairs = Fraction(0), 0
    for _, g, K, fs in cases:
        ok, res = check_duality(K, g, fs)
        worst = max(worst, res)
        pairs += len(g.edges)
    ok = worst == 0
    criterion(ok, f"{pairs} edge pairings, worst residual {worst}")
    assert ok


def test_c4_counterexample(criterion):
    t0 = time.perf_counter()
    reps = [run(CounterexampleConfig(r, n), generic_limit=3) for n in (2, 3) for r in range(1, 13)]
    stated = [rep.matches_stated for rep in reps]
    off_by = {rep.stated_closed_form - rep.form == Fraction(1, rep.r + 2) for rep in reps}
    side = all(rep.norm_ok and rep.bmo_ok and rep.wbp_ok and rep.size_ok and all(rep.checks.values())
               for rep in reps)
    dense = all(rep.dense_ok for rep in reps if rep.r <= 3)
    rows = divergence_table(24)
    positive_from = min(row.r for row in rows if all(r2.form > 0 for r2 in rows if r2.r >= row.r))
    increasing = increments_positive(rows, start=4)
    elapsed = time.perf_counter() - t0
    ok = all(stated) and side and dense and positive_from <= 4 and increasing and elapsed < 30
    criterion(ok, f"stated closed form matched {sum(stated)}/{len(stated)} (structured value is lower by "
                  f"1/(r+2) every time: {off_by == {True}}); norms/bmo/WBP/size/dense all ok: {side and dense}; "
                  f"increasing from r=4: {increasing}; Lambda > 0 only from r={positive_from} "
                  f"(Lambda(4) = {rows[3].form}); {elapsed:.1f}s")
    assert ok


def test_c5_exponents(criterion):
    cases = {
        "cup": (cup_graph(), {(1, 1): 2, (1, 2): 2, (2, 1): 2}),
        "box": (box_graph(), {e: 2 for e in box_graph().edges}),
        "matching(4)": (matching_graph(4), {(j, j): 1 for j in range(1, 5)}),
        "figure 2": (figure2_graph(), {(1, 1): 3, (1, 2): 3, (1, 3): 4, (2, 3): 3}),
    }
    results = {}
    for name, (g, want) in cases.items():
        d = exponent_thresholds(g)
        results[name] = d == want and check_witness(d, feasibility_witness(d))
    degenerate = []
    for n in (1, 2, 3, 4):
        try:
            exponent_thresholds(star_graph(n))
            degenerate.append(False)
        except DegenerateGraph:
            degenerate.append(True)
    ok = all(results.values()) and all(degenerate)
    criterion(ok, ", ".join(f"{k}: {'ok' if v else 'WRONG'}" for k, v in results.items())
              + f", m=1 raises DegenerateGraph: {all(degenerate)}")
    assert ok


def _brute_coefficient_bmo(fields, lo, finest):
    """Sup over squares of |Q0|^-1 sum_{Q in Q0} |Q| sum_f lambda_f(Q)^2, scanned directly."""
    best = Fraction(0)
    for k in range(lo, finest + 1):
        span = range(-3, (1 << max(k, 0)) + 3)
        for ix in span:
            for jy in span:
                Q0 = square(k, ix, jy)
                t = Fraction(0)
                for f in fields:
                    for kk in range(k, finest + 1):
                        for Q, v in f.squares_at(kk).items():
                            if Q0.contains(Q):
                                t += Q.measure * v * v
                best = max(best, t / Q0.measure)
    return best


def test_c6_bmo_machinery(criterion):
    rng = random.Random(66)
    g = cup_graph()
    mismatches, triples = 0, 0
    for _ in range(50):
        u, v = rng.choice(g.sorted_edges())
        sigs = [Signature.from_sets(2, 2, S, T) for S, T in (((), (v,)), ((u,), ()), ((u,), (v,)))]
        fields = [random_field(rng, s, (0, 1, 2, 3), rng.randint(1, 4), spill=1) for s in sigs]
        K = kernel_from_fields(2, 2, fields)
        rep = t1_bmo(K, g, (u, v))
        brute = _brute_coefficient_bmo(fields, -4, 3)
        triples += 1
        if not (rep.bmo_squared == brute == combined_bmo_squared(fields)[0] and rep.box_independent):
            mismatches += 1
    inv_bad = 0
    for _ in range(50):
        F = random_step(rng, 2, ((-2, 4), (0, 5)), density=0.8)
        b = bmo_seminorm_squared(F)
        c = Fraction(rng.randint(-9, 9), rng.randint(1, 7))
        t = rng.randint(1, 3)
        ok = (bmo_seminorm_squared(F, constant=c) == b and bmo_seminorm_squared(F * c) == c * c * b
              and bmo_seminorm_squared(F.dilate(t)) == b)
        inv_bad += not ok
    ok = mismatches == 0 and inv_bad == 0 and triples >= 50
    criterion(ok, f"{triples} coefficient triples, t1_bmo vs brute-force sup mismatches {mismatches}; "
                  f"invariance failures {inv_bad}/50")
    assert ok


def test_c7_necessity_identities(suite, criterion):
    cases, _ = suite
    rng = random.Random(77)
    lc_bad, nec_bad, scanned = 0, 0, 0
    for _, g, K, _ in cases:
        region = _support_square(K)
        depth = K.resolution - region.scale
        squares = list(squares_in(region, depth))
        for e in g.sorted_edges():
            ones = adjoint_on_ones(K, g, e)
            for Q in squares:
                scanned += 1
                lc_bad += not local_constancy_check(K, g, e, Q, ones)[0]
                nec_bad += not necessity_inequalities(K, g, e, Q, ones).ok
    cx_bad, cx_scanned = 0, 0
    for r in (1, 2, 3):
        for n in (2, 3):
            K = counterexample_kernel(r, n)
            g = star_graph(n)
            for e in g.sorted_edges():
                ones = adjoint_on_ones(K, g, e)
                for Q in squares_in(unit_square(), r):
                    cx_scanned += 1
                    cx_bad += not local_constancy_check(K, g, e, Q, ones)[0]
                    nec_bad += not necessity_inequalities(K, g, e, Q, ones).ok
    g = cup_graph()
    mod_bad, families = 0, 0
    for label, gg, K, _ in cases:
        if label != "cup" or families >= 60:
            continue
        region = _support_square(K)
        k = rng.randint(region.scale, K.resolution)
        w = 1 << (k - region.scale)
        Q = square(k, region.indices[0] * w + rng.randrange(w), region.indices[1] * w + rng.randrange(w))
        fam = random_family(rng, g, Q, depth=rng.randint(0, 2), signs_only=rng.random() < 0.5)
        families += 1
        mod_bad += not modulation_invariance_check(fam, K, g, rng.choice(g.sorted_edges()))[0]
    ok = lc_bad == 0 and cx_bad == 0 and nec_bad == 0 and mod_bad == 0 and families >= 50
    criterion(ok, f"local constancy failures {lc_bad}/{scanned} suite squares, {cx_bad}/{cx_scanned} "
                  f"counterexample squares; necessity failures {nec_bad}; modulation failures "
                  f"{mod_bad}/{families} families")
    assert ok


def _small_graphs():
    for m in range(1, 5):
        for n in range(1, 6 - m):
            pairs = list(itertools.product(range(1, m + 1), range(1, n + 1)))
            for r in range(1, len(pairs) + 1):
                for edges in itertools.combinations(pairs, r):
                    try:
                        yield BipartiteGraph(m, n, frozenset(edges))
                    except ValueError:
                        continue  # isolated vertex


def test_c8_planner(criterion):
    rng = random.Random(88)
    npr = np.random.default_rng(88)
    graphs = list(_small_graphs())
    instances, value_bad, cost_bad = 0, 0, 0
    for g in graphs:
        d = g.m + g.n
        for cells in range(1, 5):
            sizes = {a: cells for a in axis_names(g.m, g.n)}
            for mode in ("dense", "atomic"):
                costs = all_order_costs(g, sizes, kernel=mode)
                if plan_contraction(g, sizes, kernel=mode).cost > min(costs.values()):
                    cost_bad += 1
            # values: a dense rational kernel and inputs on a cells-wide grid at scale 2
            vals = npr.integers(-4, 5, size=(cells,) * d)
            K = PerfectKernel(g.m, g.n, StepFunction(2, (0,) * d, vals, rng.randint(1, 3)))
            fs = {e: random_step(rng, 2, ((0, cells), (0, cells))) for e in g.edges}
            naive = evaluate_form(K, g, fs, plan="naive")
            for plan in ("auto", "greedy"):
                value_bad += evaluate_form(K, g, fs, plan=plan) != naive
            order = tuple(rng.sample(axis_names(g.m, g.n), d))
            value_bad += evaluate_form(K, g, fs, plan=plan_contraction(g, cells, order=order)) != naive
            instances += 1
    ok = value_bad == 0 and cost_bad == 0
    criterion(ok, f"{len(graphs)} graphs with m+n<=5, {instances} grids of 1..4 cells/axis; planned != naive "
                  f"{value_bad}; chosen order costlier than an alternative {cost_bad}")
    assert ok


def test_c9_tree_ratio_stability(criterion):
    rng = random.Random(99)
    per_depth = 20
    sup = {}
    trees = 0
    for label, g in GRAPHS.items():
        d = exponent_thresholds(g)
        sigs = [s for s in all_signatures(2, 2) if classify_signature(g, s).cancellative]
        for depth in range(1, 7):
            for _ in range(per_depth):
                fs = random_inputs(rng, g, 6, nonnegative=True)
                tree = random_tree(rng, unit_square(), depth)
                s = rng.choice(sigs)
                fld = HaarCoefficientField(s, {Q: Fraction(rng.choice((-1, 1))) for Q in tree.squares})
                ratio = single_tree_ratio(fld, g, fs, tree, d)
                sup[(label, depth)] = max(sup.get((label, depth), Fraction(0)), ratio.hi)
                trees += 1
    growth = {label: sup[(label, 6)] / sup[(label, 1)] for label in GRAPHS}
    ok = trees >= 200 and all(v <= 2 for v in growth.values())
    detail = "; ".join(
        f"{label} sup by depth " + " ".join(f"{float(sup[(label, k)]):.2e}" for k in range(1, 7))
        + f", depth6/depth1 {float(growth[label]):.2f}" for label in GRAPHS)
    criterion(ok, f"{trees} trees; {detail}")
    assert ok
