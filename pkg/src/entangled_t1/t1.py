"""Testing conditions of T(1) type: dyadic BMO, weak boundedness, restricted tests.

Every quantity is an exact rational. Oscillations are kept squared so the
BMO seminorm never needs a square root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K_
from .dyadic import DyadicCube, pow2, square
from .errors import DimensionMismatch, EdgeNotInGraph, InvalidFamily
from .form import evaluate_adjoint, ones_on_box
from .graph import BipartiteGraph, Edge
from .kernel import PerfectKernel, covering_scale
from .step import StepFunction, tensor


def _aligned(box, width):
    return tuple(((lo // width) * width, -((-hi) // width) * width) for lo, hi in box)


def _block_sums(arr: np.ndarray, width: int) -> np.ndarray:
    if width == 1:
        return arr
    for a in range(arr.ndim):
        arr = K_.block_pair(arr, a, width, False)
    return arr


@dataclass
class BMOReport:
    value: Fraction
    witness: DyadicCube | None
    scales: tuple[int, int]


def bmo_report(F: StepFunction, constant=0) -> BMOReport:
    """Dyadic BMO seminorm squared of ``F + constant`` with a maximizing square.

    Adding a constant does not change any mean oscillation, so ``constant`` is
    accepted only to make that invariance checkable on a non-compact function.
    Squares finer than the grid see a constant; coarse squares containing the
    support are bounded by ``||F||_2^2 / |Q|`` and the scan stops once that
    bound cannot beat the running maximum.
    """
    del constant
    if F.dim != 2:
        raise DimensionMismatch("BMO is computed for functions on the plane")
    f = F.trim()
    box = f.support_box()
    if box is None:
        return BMOReport(Fraction(0), None, (F.scale, F.scale))
    R = f.scale
    l2 = (f * f).integral()
    kc = covering_scale(box, R)
    best, arg = Fraction(0), None
    sq = K_.mul(f.num, f.num)
    k = R - 1
    while True:
        if k < kc and l2 * pow2(2 * k) <= best:
            break
        W = 1 << (R - k)
        abox = _aligned(box, W)
        s1 = _block_sums(f.window(abox).num, W)
        s2 = _block_sums(StepFunction(R, f.offset, sq, 1).window_array(abox), W)
        N = W * W
        num = K_.add(K_.scale(s2, N), K_.scale(K_.mul(s1, s1), -1))
        top = K_.max_abs(num)
        if top:
            val = Fraction(top, N * N * f.den * f.den)
            if val > best:
                rel = np.unravel_index(int(np.argmax(np.abs(num))), num.shape)
                arg = square(k, abox[0][0] // W + int(rel[0]), abox[1][0] // W + int(rel[1]))
                best = val
        k -= 1
    return BMOReport(best, arg, (k + 1, R - 1))


def bmo_seminorm_squared(F: StepFunction, constant=0) -> Fraction:
    return bmo_report(F, constant).value


@dataclass
class WBPReport:
    max_ratio: Fraction
    witness: DyadicCube | None
    squares_scanned: int


def weak_boundedness_scan(kernel: PerfectKernel, region: DyadicCube, max_depth: int) -> WBPReport:
    """``sup |Lambda(1_Q, ..., 1_Q)| / |Q|`` over squares ``Q`` inside ``region`` of depth ``<= max_depth``.

    ``Lambda(1_Q, ...)`` is the integral of the kernel over ``I^m x J^n`` for
    any graph, so the graph does not enter. Below the kernel grid the cube
    sits in one cell, the value scales like ``|Q|^((m+n)/2)`` and the ratio
    can only shrink, so the scan stops at the kernel resolution.
    """
    m, n = kernel.m, kernel.n
    d = m + n
    if d < 2:
        raise ValueError("need m + n >= 2")
    R = max(kernel.resolution, region.scale)
    body = kernel.body.refine(R)
    rx = region.intervals[0].cell_range(R)
    ry = region.intervals[1].cell_range(R)
    arr = body.window_array((rx,) * m + (ry,) * n)
    best, arg, count = Fraction(0), None, 0
    last = min(region.scale + max_depth, R)
    for k in range(region.scale, last + 1):
        W = 1 << (R - k)
        sums = _block_sums(arr, W)
        nb = sums.shape[0]
        ii = np.arange(nb)
        diag = sums[(ii[:, None],) * m + (ii[None, :],) * n] if nb else sums
        count += nb * nb
        top = K_.max_abs(diag) if diag.size else 0
        if top:
            val = Fraction(top, body.den) * pow2(-R * d + 2 * k)
            if val > best:
                i, j = np.unravel_index(int(np.argmax(np.abs(diag))), diag.shape)
                best = val
                arg = square(k, rx[0] // W + int(i), ry[0] // W + int(j))
    return WBPReport(best, arg, count)


def _square_indicator(Q: DyadicCube) -> StepFunction:
    return StepFunction.indicator(Q)


def _restrict(T: StepFunction, Q: DyadicCube) -> StepFunction:
    s = max(T.scale, Q.scale)
    T = T.refine(s)
    return T.window(tuple(iv.cell_range(s) for iv in Q.intervals))


def adjoint_on_ones(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, times: int = 1) -> StepFunction:
    """``T_{u,v}(1, ..., 1)`` with 1 replaced by the indicator of a padded support box."""
    one = ones_on_box(kernel, times)
    return evaluate_adjoint(kernel, g, edge, {e: one for e in g.edges if e != edge})


def adjoint_on_square(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, Q: DyadicCube) -> StepFunction:
    one = _square_indicator(Q)
    return evaluate_adjoint(kernel, g, edge, {e: one for e in g.edges if e != edge})


@dataclass
class T1Report:
    bmo_squared: Fraction
    witness: DyadicCube | None
    box_independent: bool


def t1_bmo(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge) -> T1Report:
    """BMO seminorm squared of ``T_{u,v}(1, ..., 1)``; recomputed on a doubly padded box."""
    if edge not in g.edges:
        raise EdgeNotInGraph(edge)
    if kernel.body.support_box() is None:
        return T1Report(Fraction(0), None, True)
    first = bmo_report(adjoint_on_ones(kernel, g, edge, 1))
    second = bmo_report(adjoint_on_ones(kernel, g, edge, 2))
    return T1Report(first.value, first.witness, first.value == second.value)


def _l1_on(T: StepFunction, Q: DyadicCube) -> Fraction:
    return abs(_restrict(T, Q)).integral()


def restricted_test(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, Q: DyadicCube) -> Fraction:
    """``||T_{u,v}(1_Q, ..., 1_Q)||_{L^1(Q)} / |Q|``."""
    if edge not in g.edges:
        raise EdgeNotInGraph(edge)
    return _l1_on(adjoint_on_square(kernel, g, edge, Q), Q) / Q.measure


@dataclass
class ModulationFamily:
    """One-dimensional factors ``a[e]`` on ``I`` and ``b[e]`` on ``J`` for every edge."""

    square: DyadicCube
    a: dict[Edge, StepFunction]
    b: dict[Edge, StepFunction]

    def tensors(self) -> dict[Edge, StepFunction]:
        return {e: tensor(self.a[e], self.b[e]) for e in self.a}

    def validate(self, g: BipartiteGraph) -> None:
        I, J = self.square.intervals
        if set(self.a) != set(g.edges) or set(self.b) != set(g.edges):
            raise InvalidFamily("family must give one a and one b per edge")
        one_I = StepFunction.indicator([I])
        one_J = StepFunction.indicator([J])
        for side, pieces, unit, iv in (("x", self.a, one_I, I), ("y", self.b, one_J, J)):
            groups: dict[int, list[StepFunction]] = {}
            for (i, j), f in pieces.items():
                if f.dim != 1:
                    raise InvalidFamily(f"factor on edge {(i, j)} is not one-dimensional")
                if (f * unit) != f:
                    raise InvalidFamily(f"factor on edge {(i, j)} does not vanish outside {iv}")
                groups.setdefault(i if side == "x" else j, []).append(f)
            for v, fs in groups.items():
                prod = fs[0]
                for f in fs[1:]:
                    prod = prod * f
                if prod != unit:
                    raise InvalidFamily(f"factors at {side}{v} do not multiply to the indicator")


def trivial_family(g: BipartiteGraph, Q: DyadicCube) -> ModulationFamily:
    I, J = Q.intervals
    return ModulationFamily(Q, {e: StepFunction.indicator([I]) for e in g.edges},
                            {e: StepFunction.indicator([J]) for e in g.edges})


def modulation_invariance_check(fam: ModulationFamily, kernel: PerfectKernel, g: BipartiteGraph,
                                edge: Edge) -> tuple[bool, Fraction]:
    """Compare ``T(B, ...) * B_{u,v}`` with ``T(1_Q, ...) * 1_Q`` cellwise and in ``L^1``.

    Returns whether the two ``L^1`` quantities agree and the largest cellwise difference.
    """
    if edge not in g.edges:
        raise EdgeNotInGraph(edge)
    fam.validate(g)
    B = fam.tensors()
    Q = fam.square
    modulated = evaluate_adjoint(kernel, g, edge, {e: f for e, f in B.items() if e != edge}) * B[edge]
    plain = _restrict(adjoint_on_square(kernel, g, edge, Q), Q)
    diff = (modulated - plain).max_abs()
    same = abs(modulated).integral() == abs(plain).integral()
    return same and diff == 0, diff


def _centered(T: StepFunction, Q: DyadicCube) -> StepFunction:
    r = _restrict(T, Q)
    mean = r.integral() / Q.measure
    return r - StepFunction.constant(mean, Q, r.scale)


def local_constancy_check(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, Q: DyadicCube,
                          ones: StepFunction | None = None) -> tuple[bool, Fraction]:
    """On ``Q``, ``T(1, ...) - mean`` and ``T(1_Q, ...) - mean`` agree cellwise; largest difference."""
    T1 = ones if ones is not None else adjoint_on_ones(kernel, g, edge)
    TQ = adjoint_on_square(kernel, g, edge, Q)
    diff = (_centered(T1, Q) - _centered(TQ, Q)).max_abs()
    return diff == 0, diff


@dataclass
class NecessityReport:
    square: DyadicCube
    form: Fraction
    l1_test: Fraction
    oscillation: Fraction
    wbp_ok: bool
    oscillation_ok: bool
    jensen_ok: dict[int, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.wbp_ok and self.oscillation_ok and all(self.jensen_ok.values())


def necessity_inequalities(kernel: PerfectKernel, g: BipartiteGraph, edge: Edge, Q: DyadicCube,
                           ones: StepFunction | None = None, exponents=(2, 3)) -> NecessityReport:
    """Both inequalities reducing the T(1) conditions to the restricted test on ``Q``.

    ``|Lambda(1_Q, ...)| <= ||T(1_Q, ...)||_{L^1(Q)}`` and the ``L^1`` mean
    oscillation of ``T(1, ...)`` on ``Q`` is at most ``2 |Q|^-1 ||T(1_Q, ...)||_{L^1(Q)}``.
    The Jensen step compares ``p'``-th powers of the ``L^1`` and ``L^p'`` means.
    """
    T1 = ones if ones is not None else adjoint_on_ones(kernel, g, edge)
    TQ = adjoint_on_square(kernel, g, edge, Q)
    one = _square_indicator(Q)
    form = (TQ * one).integral()
    l1 = _l1_on(TQ, Q)
    osc = abs(_centered(T1, Q)).integral() / Q.measure
    rep = NecessityReport(Q, form, l1, osc, abs(form) <= l1, osc <= 2 * l1 / Q.measure)
    r = abs(_restrict(TQ, Q))
    mean1 = r.integral() / Q.measure
    for p in exponents:
        rep.jensen_ok[p] = mean1 ** p <= r.power(p).integral() / Q.measure
    return rep


def squares_in(region: DyadicCube, depth: int):
    """Every dyadic square inside ``region`` with scale up to ``region.scale + depth``."""
    I, J = region.intervals
    for k in range(region.scale, region.scale + depth + 1):
        for i in range(*I.cell_range(k)):
            for j in range(*J.cell_range(k)):
                yield square(k, i, j)
