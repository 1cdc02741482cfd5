"""The entangled form, its adjoints and the duality between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K_
from .contraction import ContractionPlan, axis_names, execute_plan, plan_contraction
from .dyadic import pow2
from .errors import DimensionMismatch, EdgeNotInGraph
from .graph import BipartiteGraph, Edge
from .kernel import PerfectKernel
from .step import StepFunction

Functions = Mapping[Edge, StepFunction]


def _check_inputs(kernel: PerfectKernel | None, g: BipartiteGraph, fs: Functions, skip: Edge | None):
    if kernel is not None and (kernel.m, kernel.n) != (g.m, g.n):
        raise DimensionMismatch(f"kernel is ({kernel.m},{kernel.n}) but graph is ({g.m},{g.n})")
    need = set(g.edges) - ({skip} if skip else set())
    missing = need - set(fs)
    if missing:
        raise DimensionMismatch(f"missing functions for edges {sorted(missing)}")
    extra = set(fs) - set(g.edges)
    if extra:
        raise DimensionMismatch(f"functions given for non-edges {sorted(extra)}")
    for e in need:
        if fs[e].dim != 2:
            raise DimensionMismatch(f"function on edge {e} is not two-dimensional")


@dataclass
class _Prepared:
    scale: int
    ranges: dict[str, tuple[int, int]]
    operands: dict[str, tuple[np.ndarray, tuple[str, ...]]]
    den: int
    empty: bool


def _prepare(kernel_body: StepFunction | None, g: BipartiteGraph, fs: Functions, skip: Edge | None,
             unary: Sequence[StepFunction] | None = None) -> _Prepared:
    """Refine to a common grid and crop every operand to the axis ranges where the product can be nonzero."""
    axes = axis_names(g.m, g.n)
    edges = [e for e in g.sorted_edges() if e != skip]
    pieces = [fs[e] for e in edges] + ([kernel_body] if kernel_body is not None else []) + list(unary or [])
    s = max(p.scale for p in pieces)
    refined = {e: fs[e].refine(s) for e in edges}
    ranges: dict[str, tuple[int, int]] = {}

    def clip(a, lo, hi):
        if a in ranges:
            lo, hi = max(lo, ranges[a][0]), min(hi, ranges[a][1])
        ranges[a] = (lo, max(lo, hi))

    for (i, j), f in refined.items():
        (xl, xh), (yl, yh) = f.box
        clip(f"x{i}", xl, xh)
        clip(f"y{j}", yl, yh)
    body = kernel_body.refine(s) if kernel_body is not None else None
    if body is not None:
        for a, (lo, hi) in zip(axes, body.box):
            clip(a, lo, hi)
    units = [u.refine(s) for u in unary] if unary else []
    for a, u in zip(axes, units):
        clip(a, *u.box[0])
    # axes touched only by the skipped edge keep the kernel's range
    for a in axes:
        if a not in ranges:
            ranges[a] = body.box[axes.index(a)] if body is not None else (0, 0)
    operands, den = {}, 1
    for (i, j), f in refined.items():
        box = (ranges[f"x{i}"], ranges[f"y{j}"])
        operands[f"F{i},{j}"] = (f.window_array(box), (f"x{i}", f"y{j}"))
        den *= f.den
    if body is not None:
        operands["K"] = (body.window_array(tuple(ranges[a] for a in axes)), tuple(axes))
        den *= body.den
    for a, u in zip(axes, units):
        operands[f"K[{a}]"] = (u.window_array((ranges[a],)), (a,))
        den *= u.den
    empty = any(hi <= lo for lo, hi in ranges.values())
    return _Prepared(s, ranges, operands, den, empty)


def _sizes(p: _Prepared) -> dict[str, int]:
    return {a: hi - lo for a, (lo, hi) in p.ranges.items()}


def _contract(p: _Prepared, g: BipartiteGraph, kernel_mode: str, out_axes: Sequence[str], skip: Edge | None,
              plan: str | ContractionPlan) -> np.ndarray:
    sizes = _sizes(p)
    if plan == "naive":
        return K_.product_sum(list(p.operands.values()), out_axes, sizes)
    if isinstance(plan, ContractionPlan):
        chosen = plan
    elif plan in ("auto", "optimal", "greedy"):
        chosen = plan_contraction(g, sizes, kernel_mode, out_axes, [skip] if skip else [],
                                  "greedy" if plan == "greedy" else "optimal")
    else:
        raise ValueError(f"unknown plan {plan!r}")
    return execute_plan(chosen, p.operands, sizes)


def evaluate_form(kernel: PerfectKernel, g: BipartiteGraph, fs: Functions, plan: str | ContractionPlan = "auto") -> Fraction:
    """Exact value of ``int K prod F_ij(x_i, y_j)`` on the common grid."""
    _check_inputs(kernel, g, fs, None)
    p = _prepare(kernel.body, g, fs, None)
    if p.empty:
        return Fraction(0)
    total = K_.total(np.asarray(_contract(p, g, "dense", (), None, plan)))
    return Fraction(total, p.den) * pow2(-p.scale * (g.m + g.n))


def evaluate_adjoint(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, fs: Functions,
                     plan: str | ContractionPlan = "auto") -> StepFunction:
    """``T_{u,v}`` applied to the functions on the other edges, as a step function of ``(x_u, y_v)``."""
    if edge not in g.edges:
        raise EdgeNotInGraph(edge)
    fs = {e: f for e, f in fs.items() if e != edge}
    _check_inputs(kernel, g, fs, edge)
    u, v = edge
    p = _prepare(kernel.body, g, fs, edge)
    out = (f"x{u}", f"y{v}")
    lo = [p.ranges[a][0] for a in out]
    if p.empty:
        return StepFunction.zero(2, p.scale)
    arr = _contract(p, g, "dense", out, edge, plan)
    den = p.den * (1 << (p.scale * (g.m + g.n - 2))) if p.scale >= 0 else p.den
    arr = arr if p.scale >= 0 else K_.scale(arr, 1 << (-p.scale * (g.m + g.n - 2)))
    return StepFunction(p.scale, lo, arr, den)


def pair(f: StepFunction, h: StepFunction) -> Fraction:
    """``int f h`` for two step functions of one dimension."""
    return (f * h).integral()


def check_duality(kernel: PerfectKernel, g: BipartiteGraph, fs: Functions) -> tuple[bool, Fraction]:
    """Compare the form with each adjoint paired against the left-out function; worst residual."""
    value = evaluate_form(kernel, g, fs)
    worst = Fraction(0)
    for e in g.sorted_edges():
        t = evaluate_adjoint(kernel, g, e, fs)
        worst = max(worst, abs(pair(t, fs[e]) - value))
    return worst == 0, worst


@dataclass(frozen=True)
class KernelAtom:
    """Product-form kernel ``coef * u_1(x_1) ... u_m(x_m) w_1(y_1) ... w_n(y_n)``."""

    coef: Fraction
    factors: tuple[StepFunction, ...]

    def dense(self) -> StepFunction:
        from .step import tensor

        return tensor(*self.factors) * self.coef


def atoms_to_kernel(m: int, n: int, atoms: Sequence[KernelAtom]) -> PerfectKernel:
    body = StepFunction.zero(m + n)
    for a in atoms:
        body = body + a.dense()
    return PerfectKernel(m, n, body)


def evaluate_form_atoms(atoms: Sequence[KernelAtom], g: BipartiteGraph, fs: Functions,
                        plan: str | ContractionPlan = "auto") -> Fraction:
    """Form value for a kernel given as a sum of product atoms, planned per atom."""
    _check_inputs(None, g, fs, None)
    total = Fraction(0)
    for atom in atoms:
        if atom.coef == 0:
            continue
        if len(atom.factors) != g.m + g.n:
            raise DimensionMismatch("atom needs one factor per axis")
        p = _prepare(None, g, fs, None, atom.factors)
        if p.empty:
            continue
        s = K_.total(np.asarray(_contract(p, g, "atomic", (), None, plan)))
        total += atom.coef * Fraction(s, p.den) * pow2(-p.scale * (g.m + g.n))
    return total


def form_on_square_indicators(kernel: PerfectKernel, g: BipartiteGraph, square) -> Fraction:
    """``Lambda(1_Q, ..., 1_Q)`` by direct substitution of indicators."""
    one = StepFunction.indicator(square)
    return evaluate_form(kernel, g, {e: one for e in g.edges})


def padded_box(kernel: PerfectKernel, times: int = 1) -> tuple[tuple[int, int], tuple[int, int], int]:
    """Cell ranges (x, y) at the kernel scale covering the support, padded by ``times`` support widths."""
    box = kernel.body.support_box()
    s = kernel.resolution
    if box is None:
        return (0, 1), (0, 1), s
    xl = min(lo for lo, _ in box[: kernel.m])
    xh = max(hi for _, hi in box[: kernel.m])
    yl = min(lo for lo, _ in box[kernel.m:])
    yh = max(hi for _, hi in box[kernel.m:])
    wx, wy = (xh - xl) * times, (yh - yl) * times
    return (xl - wx, xh + wx), (yl - wy, yh + wy), s


def ones_on_box(kernel: PerfectKernel, times: int = 1) -> StepFunction:
    """Indicator standing in for the constant function 1 on the plane."""
    xr, yr, s = padded_box(kernel, times)
    return StepFunction.box_indicator(s, (xr, yr))
