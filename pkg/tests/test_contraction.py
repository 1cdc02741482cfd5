import itertools

import numpy as np

from entangled_t1.contraction import all_order_costs, axis_names, execute_plan, naive_cost, plan_contraction
from entangled_t1.graph import box_graph, cup_graph, matching_graph


def test_cup_atomic_plan_beats_naive():
    g = cup_graph()
    for cells in (2, 3, 4):
        plan = plan_contraction(g, cells, kernel="atomic")
        assert plan.cost < plan.naive_cost
        costs = all_order_costs(g, cells, kernel="atomic")
        assert plan.cost == min(costs.values())


def test_single_edge_cost_equals_naive():
    g = matching_graph(1)
    plan = plan_contraction(g, 4)
    costs = all_order_costs(g, 4)
    assert len(set(costs.values())) == 1
    assert plan.cost == naive_cost(g, {a: 4 for a in axis_names(1, 1)})


def test_box_best_below_worst():
    for cells in (2, 3, 4, 5):
        costs = all_order_costs(box_graph(), cells)
        best = plan_contraction(box_graph(), cells).cost
        assert best == min(costs.values())
        if cells >= 4:
            assert best < max(costs.values())


def test_fused_reductions_execute():
    # the second step only re-sums the first output; execution must still be exact
    g = matching_graph(1)
    rng = np.random.default_rng(1)
    K, F = rng.integers(-4, 5, size=(3, 3)), rng.integers(-4, 5, size=(3, 3))
    ops = {"K": (K, ("x1", "y1")), "F1,1": (F, ("x1", "y1"))}
    for order in (("x1", "y1"), ("y1", "x1")):
        plan = plan_contraction(g, 3, order=order)
        assert plan.steps[1].cost == 0
        assert int(execute_plan(plan, ops, {"x1": 3, "y1": 3})) == int((K * F).sum())


def test_plan_eliminates_every_axis_once():
    g = box_graph()
    plan = plan_contraction(g, 3)
    assert sorted(plan.order) == sorted(axis_names(2, 2))
    plan = plan_contraction(g, 3, out_axes=("x1", "y2"), skip=[(1, 2)])
    assert sorted(plan.order) == ["x2", "y1"]
    assert plan.describe()


def test_deterministic_tie_break():
    a = plan_contraction(box_graph(), 2)
    b = plan_contraction(box_graph(), 2)
    assert a.order == b.order


def test_execute_plan_matches_einsum():
    g = cup_graph()
    rng = np.random.default_rng(0)
    n = 3
    K = rng.integers(-5, 6, size=(n,) * 4)
    F = {e: rng.integers(-5, 6, size=(n, n)) for e in g.sorted_edges()}
    ops = {"K": (K, ("x1", "x2", "y1", "y2"))}
    for (i, j), a in F.items():
        ops[f"F{i},{j}"] = (a, (f"x{i}", f"y{j}"))
    want = np.einsum("abcd,ac,ad,bc->", K, F[(1, 1)], F[(1, 2)], F[(2, 1)])
    for order in itertools.permutations(axis_names(2, 2)):
        plan = plan_contraction(g, n, order=order)
        assert int(np.asarray(execute_plan(plan, ops, {a: n for a in axis_names(2, 2)})).sum()) == want
