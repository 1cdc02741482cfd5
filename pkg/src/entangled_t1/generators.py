"""Random objects for tests, benchmarks and the acceptance suite.

All generators take a ``random.Random`` so runs are reproducible from a seed.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, square
from .graph import BipartiteGraph, Signature, all_signatures
from .kernel import PerfectKernel
from .paraproduct import ConvexTree, HaarCoefficientField, kernel_from_fields
from .step import Box, StepFunction
from .t1 import ModulationFamily


def random_rational(rng: random.Random, bound: int = 4, den: int = 3, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-bound, bound), rng.randint(1, den))
        if q or not nonzero:
            return q


def random_step(rng: random.Random, scale: int, box: Box, bound: int = 4, den: int = 3,
                nonnegative: bool = False, density: float = 1.0) -> StepFunction:
    """Step function with random rational values on the cell box ``box``."""
    shape = [hi - lo for lo, hi in box]
    size = int(np.prod(shape)) if shape else 1
    vals = []
    for _ in range(size):
        if rng.random() >= density:
            vals.append(Fraction(0))
        elif nonnegative:
            vals.append(Fraction(rng.randint(0, bound), rng.randint(1, den)))
        else:
            vals.append(random_rational(rng, bound, den))
    arr = np.empty(size, dtype=object)
    arr[:] = vals
    return StepFunction.from_values(scale, [lo for lo, _ in box], arr.reshape(shape))


def random_inputs(rng: random.Random, g: BipartiteGraph, scale: int = 3, box: Box | None = None,
                  **kw) -> dict[tuple[int, int], StepFunction]:
    """One random planar step function per edge; default box is the unit square."""
    if box is None:
        box = ((0, 1 << scale), (0, 1 << scale))
    return {e: random_step(rng, scale, box, **kw) for e in g.sorted_edges()}


def random_field(rng: random.Random, s: Signature, scales: Sequence[int] = (0, 1, 2), count: int = 3,
                 spill: int = 0, linf: Fraction | None = None) -> HaarCoefficientField:
    """A few random squares at the given scales, indices within the unit square (plus ``spill``)."""
    coeffs = {}
    for _ in range(count):
        k = rng.choice(list(scales))
        hi = (1 << k) - 1 + spill
        Q = square(k, rng.randint(-spill, hi), rng.randint(-spill, hi))
        coeffs[Q] = (rng.choice((-1, 1)) * linf) if linf is not None else random_rational(rng)
    return HaarCoefficientField(s, coeffs)


def random_perfect_kernel(rng: random.Random, m: int = 2, n: int = 2, resolution: int = 3,
                          per_signature: int = 2, constant: bool = True, shift: bool = False) -> PerfectKernel:
    """Sum of random diagonal Haar atoms over every signature plus a constant on the unit cube.

    Such kernels are constant on every off-diagonal dyadic cube by construction.
    """
    fields = [random_field(rng, s, range(resolution), per_signature) for s in all_signatures(m, n)]
    c = random_rational(rng) if constant else 0
    K = kernel_from_fields(m, n, fields, constant=c)
    if K.resolution < resolution:
        K = PerfectKernel(m, n, K.body.refine(resolution))
    if shift:
        # whole-unit shifts keep every atom on the dyadic grid
        w = 1 << K.resolution
        K = K.translate(w * rng.randint(-2, 1), w * rng.randint(-2, 1))
    return K


def random_family(rng: random.Random, g: BipartiteGraph, Q: DyadicCube, depth: int = 1,
                  signs_only: bool = False) -> ModulationFamily:
    """Random modulation family on ``Q``: per vertex, the last factor cancels the others."""
    I, J = Q.intervals
    k = Q.scale + depth

    def pieces(iv, count):
        lo, hi = iv.cell_range(k)
        out, prod = [], [Fraction(1)] * (hi - lo)
        for _ in range(count - 1):
            if signs_only:
                vals = [Fraction(rng.choice((-1, 1))) for _ in range(hi - lo)]
            else:
                vals = [random_rational(rng, nonzero=True) for _ in range(hi - lo)]
            prod = [p * v for p, v in zip(prod, vals)]
            out.append(vals)
        out.append([1 / p for p in prod])
        return [StepFunction.from_cells(1, k, {(lo + t,): v for t, v in enumerate(vals)}) for vals in out]

    a, b = {}, {}
    for i in range(1, g.m + 1):
        nbrs = g.neighbors_x(i)
        for j, f in zip(nbrs, pieces(I, len(nbrs))):
            a[(i, j)] = f
    for j in range(1, g.n + 1):
        nbrs = g.neighbors_y(j)
        for i, f in zip(nbrs, pieces(J, len(nbrs))):
            b[(i, j)] = f
    return ModulationFamily(Q, a, b)


def random_tree(rng: random.Random, top: DyadicCube, depth: int, keep: float = 0.5) -> ConvexTree:
    """Convex tree grown down from ``top``; some path always reaches ``depth`` levels."""
    members = {top}
    layer = [top]
    for _ in range(depth - 1):
        kids = [c for Q in layer for c in Q.children()]
        chosen = [c for c in kids if rng.random() < keep] or [rng.choice(kids)]
        members.update(chosen)
        layer = chosen
    return ConvexTree(frozenset(members), top)
