"""Variable-elimination planning for entangled sums.

A form is a sum over the grid axes ``x1..xm, y1..yn`` of a product of
factors: one ``F_ij`` on ``(x_i, y_j)`` per edge, plus the kernel. A dense
kernel is a single factor on every axis; a product-form (atomic) kernel is one
unary factor per axis, which is what lets elimination orders pay off.

Cost model: eliminating an axis multiplies together every factor carrying it,
costing ``(cells of the union scope) * (number of factors)`` multiply-adds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .graph import BipartiteGraph

Axis = str


def axis_names(m: int, n: int) -> list[Axis]:
    return [f"x{i}" for i in range(1, m + 1)] + [f"y{j}" for j in range(1, n + 1)]


def factor_scopes(g: BipartiteGraph, kernel: str = "dense", skip: Sequence = ()) -> dict[str, frozenset[Axis]]:
    """Named factor scopes for a graph; ``kernel`` is ``dense``, ``atomic`` or ``none``."""
    scopes: dict[str, frozenset[Axis]] = {}
    for i, j in g.sorted_edges():
        if (i, j) in skip:
            continue
        scopes[f"F{i},{j}"] = frozenset({f"x{i}", f"y{j}"})
    axes = axis_names(g.m, g.n)
    if kernel == "dense":
        scopes["K"] = frozenset(axes)
    elif kernel == "atomic":
        for a in axes:
            scopes[f"K[{a}]"] = frozenset({a})
    elif kernel != "none":
        raise ValueError(f"unknown kernel mode {kernel!r}")
    return scopes


@dataclass(frozen=True)
class PlanStep:
    axis: Axis | None
    inputs: tuple[str, ...]
    output: str
    scope: tuple[Axis, ...]
    cost: int


@dataclass(frozen=True)
class ContractionPlan:
    order: tuple[Axis, ...]
    steps: tuple[PlanStep, ...]
    cost: int
    naive_cost: int
    out_axes: tuple[Axis, ...] = ()

    def describe(self) -> str:
        lines = [f"order: {' '.join(self.order) or '-'}", f"predicted cost: {self.cost} (naive {self.naive_cost})"]
        for st in self.steps:
            what = f"sum {st.axis}" if st.axis else "combine"
            lines.append(f"  {what}: {' * '.join(st.inputs)} -> {st.output}[{','.join(st.scope)}] cost {st.cost}")
        return "\n".join(lines)


def _cells(scope, sizes) -> int:
    return math.prod(sizes[a] for a in scope)


def _axis_key(axes: Sequence[Axis]):
    pos = {a: k for k, a in enumerate(axes)}
    return lambda a: pos[a]


def simulate(scopes: Mapping[str, frozenset[Axis]], sizes: Mapping[Axis, int], order: Sequence[Axis],
             out_axes: Sequence[Axis] = (), axes: Sequence[Axis] | None = None) -> tuple[list[PlanStep], int]:
    """Steps and total predicted cost of eliminating ``order`` then combining onto ``out_axes``."""
    axes = list(axes) if axes is not None else sorted({a for s in scopes.values() for a in s} | set(out_axes))
    key = _axis_key(axes)
    live = dict(scopes)
    steps, total = [], 0
    prev = None
    for t, v in enumerate(order):
        names = [f for f, s in live.items() if v in s]
        union = frozenset().union(*(live[f] for f in names)) if names else frozenset({v})
        if names and names == [prev]:
            # summing the previous intermediate again fuses into the step that built it
            cost = 0
        else:
            cost = _cells(union, sizes) * max(len(names), 1)
        scope = tuple(sorted(union - {v}, key=key))
        out = f"g{t + 1}"
        for f in names:
            del live[f]
        live[out] = frozenset(scope)
        steps.append(PlanStep(v, tuple(names), out, scope, cost))
        total += cost
        prev = out
    names = list(live)
    union = frozenset().union(*live.values()) if live else frozenset()
    if len(names) > 1 or union != frozenset(out_axes):
        cost = _cells(frozenset(out_axes) | union, sizes) * max(len(names), 1)
        steps.append(PlanStep(None, tuple(names), "result", tuple(out_axes), cost))
        total += cost
    return steps, total


def _eliminate(live: tuple[frozenset, ...], v) -> tuple[tuple[frozenset, ...], frozenset, int]:
    touched = [s for s in live if v in s]
    rest = tuple(s for s in live if v not in s)
    union = frozenset().union(*touched) if touched else frozenset({v})
    return rest + (union - {v},), union, max(len(touched), 1)


def optimal_order(scopes: Mapping[str, frozenset[Axis]], sizes: Mapping[Axis, int], elim: Sequence[Axis]) -> tuple[Axis, ...]:
    """Exact minimum-cost elimination order by dynamic programming over subsets.

    The factor scopes left after eliminating a set of axes do not depend on the
    order used. A step that only sums the previous intermediate is free, so the
    state also records the scope of that intermediate. Ties go to the
    lexicographically smallest order in ``elim`` position.
    """
    elim = list(elim)
    idx = {a: k for k, a in enumerate(elim)}
    start = tuple(sorted(scopes.values(), key=lambda s: sorted(s)))
    # (eliminated set, scope of the previous intermediate or None) -> (cost, order, live)
    best: dict[tuple, tuple[int, tuple[int, ...], tuple]] = {(frozenset(), None): (0, (), start)}
    for size in range(len(elim)):
        layer = [(key, v) for key, v in best.items() if len(key[0]) == size]
        for (S, prev), (cost, order, live) in layer:
            for v in elim:
                if v in S:
                    continue
                touched = [s for s in live if v in s]
                new_live, union, k = _eliminate(live, v)
                if prev is not None and touched == [prev] and live[-1] == prev:
                    step = 0
                else:
                    step = _cells(union, sizes) * k
                T = (S | {v}, new_live[-1])
                cand = (cost + step, order + (idx[v],), new_live)
                if T not in best or cand[:2] < best[T][:2]:
                    best[T] = cand
    full = frozenset(elim)
    _, order, _ = min((v for key, v in best.items() if key[0] == full), key=lambda c: c[:2])
    return tuple(elim[k] for k in order)


def greedy_order(scopes: Mapping[str, frozenset[Axis]], elim: Sequence[Axis]) -> tuple[Axis, ...]:
    """Repeatedly eliminate the axis touched by the fewest input ``F`` factors (lowest index on ties)."""
    remaining = list(elim)
    live = {f: s for f, s in scopes.items()}
    order = []
    while remaining:
        def incident(a):
            return sum(1 for f, s in live.items() if a in s and f.startswith("F"))
        v = min(remaining, key=lambda a: (incident(a), remaining.index(a)))
        names = [f for f, s in live.items() if v in s]
        union = frozenset().union(*(live[f] for f in names)) if names else frozenset()
        for f in names:
            del live[f]
        live[f"g{len(order)}"] = union - {v}
        order.append(v)
        remaining.remove(v)
    return tuple(order)


def naive_cost(g: BipartiteGraph, sizes: Mapping[Axis, int], skip: Sequence = ()) -> int:
    """Cost of summing the full product over the whole grid with a dense kernel."""
    n_factors = len([e for e in g.edges if e not in skip]) + 1
    return math.prod(sizes[a] for a in axis_names(g.m, g.n)) * n_factors


def plan_contraction(g: BipartiteGraph, sizes: Mapping[Axis, int] | int, kernel: str = "dense",
                     out_axes: Sequence[Axis] = (), skip: Sequence = (), strategy: str = "optimal",
                     order: Sequence[Axis] | None = None) -> ContractionPlan:
    """Choose an elimination order for a form (``out_axes`` empty) or an adjoint.

    ``sizes`` maps axis names to cell counts, or is one count for every axis.
    """
    axes = axis_names(g.m, g.n)
    if isinstance(sizes, int):
        sizes = {a: sizes for a in axes}
    scopes = factor_scopes(g, kernel, skip)
    elim = [a for a in axes if a not in out_axes]
    if order is None:
        if strategy == "optimal" and len(elim) <= 14:
            order = optimal_order(scopes, sizes, elim)
        elif strategy in ("optimal", "greedy"):
            order = greedy_order(scopes, elim)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
    steps, cost = simulate(scopes, sizes, order, out_axes, axes)
    return ContractionPlan(tuple(order), tuple(steps), cost, naive_cost(g, sizes, skip), tuple(out_axes))


def all_order_costs(g: BipartiteGraph, sizes: Mapping[Axis, int] | int, kernel: str = "dense",
                    out_axes: Sequence[Axis] = (), skip: Sequence = ()) -> dict[tuple[Axis, ...], int]:
    """Predicted cost of every elimination order (exhaustive; small graphs only)."""
    axes = axis_names(g.m, g.n)
    if isinstance(sizes, int):
        sizes = {a: sizes for a in axes}
    scopes = factor_scopes(g, kernel, skip)
    elim = [a for a in axes if a not in out_axes]
    return {order: simulate(scopes, sizes, order, out_axes, axes)[1] for order in itertools.permutations(elim)}


def execute_plan(plan: ContractionPlan, operands: Mapping[str, tuple[np.ndarray, Sequence[Hashable]]],
                 sizes: Mapping[Axis, int] | None = None) -> np.ndarray:
    """Run a plan on integer arrays labelled by axis names; returns an array over ``plan.out_axes``."""
    live = {name: (arr, tuple(lab)) for name, (arr, lab) in operands.items()}
    steps = list(plan.steps)
    for t, st in enumerate(steps):
        if st.axis is not None and t + 1 < len(steps) and steps[t + 1].inputs == (st.output,) \
                and steps[t + 1].axis is not None:
            # fused: the next step only sums this output again
            steps[t + 1] = PlanStep(steps[t + 1].axis, st.inputs, steps[t + 1].output, steps[t + 1].scope, 0)
            continue
        ops = [live.pop(f) for f in st.inputs]
        if st.axis is not None:
            res = K.product_sum(ops, st.scope, sizes)
            if not ops:
                res = K.scale(res, sizes[st.axis])
        else:
            res = K.product_sum(ops, plan.out_axes, sizes)
        live[st.output] = (res, st.scope)
    if "result" in live:
        return live["result"][0]
    (arr, lab), = live.values()
    perm = [lab.index(a) for a in plan.out_axes]
    return np.transpose(arr, perm) if perm else arr
