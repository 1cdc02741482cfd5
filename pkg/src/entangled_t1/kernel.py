"""Perfect dyadic kernels: representation, validation and constructors.

Axes of a kernel body are ordered ``x1..xm, y1..yn``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, pow2
from .errors import DimensionMismatch, ParseError
from .step import Box, StepFunction, _parse_cells, _split_header


@dataclass(frozen=True)
class PerfectKernel:
    m: int
    n: int
    body: StepFunction
    declared_size_constant: Fraction | None = None

    def __post_init__(self):
        if self.body.dim != self.m + self.n:
            raise DimensionMismatch(f"kernel body has dimension {self.body.dim}, expected {self.m + self.n}")

    @property
    def dim(self) -> int:
        return self.m + self.n

    @property
    def resolution(self) -> int:
        return self.body.scale

    def support_box(self) -> Box | None:
        return self.body.support_box()

    def scaled(self, c) -> PerfectKernel:
        return PerfectKernel(self.m, self.n, self.body * Fraction(c))

    def translate(self, x_shift: int, y_shift: int) -> PerfectKernel:
        """Shift every x axis by ``x_shift`` cells and every y axis by ``y_shift`` cells."""
        shift = [x_shift] * self.m + [y_shift] * self.n
        return PerfectKernel(self.m, self.n, self.body.translate(shift))

    def to_text(self) -> str:
        lines = [f"KERNEL m={self.m} n={self.n} scale={self.body.scale}"]
        for idx, v in self.body.cells():
            lines.append(" ".join(map(str, idx)) + f" {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PerfectKernel:
        header, body = _split_header(text, "KERNEL")
        try:
            m, n, scale = int(header["m"]), int(header["n"]), int(header["scale"])
        except (KeyError, ValueError) as exc:
            raise ParseError("header needs integer m, n and scale", 1) from exc
        cells = _parse_cells(body, m + n)
        return cls(m, n, StepFunction.from_cells(m + n, scale, cells))


def is_diagonal_block(indices: Sequence[int], m: int) -> bool:
    """Whether the cube with these same-scale indices meets the diagonal."""
    xs, ys = indices[:m], indices[m:]
    return len(set(xs)) <= 1 and len(set(ys)) <= 1


def covering_scale(box: Box | None, scale: int) -> int:
    """Finest scale ``s <= scale`` with the box inside ``[-2^-s, 2^-s)`` on every axis."""
    if box is None:
        return scale
    reach = max(max(-lo, hi) for lo, hi in box)
    t = 0
    while (1 << t) < reach:
        t += 1
    return scale - t


@dataclass
class DiagonalReport:
    valid: bool
    violations: list[DyadicCube] = field(default_factory=list)
    finest_scale: int = 0
    coarsest_scale: int = 0
    cubes_checked: int = 0


def _align_even(arr: np.ndarray, offset: list[int], fill: int = 0) -> tuple[np.ndarray, list[int]]:
    pads, new_off = [], []
    for a, o in enumerate(offset):
        lo = o & 1
        hi = (o + arr.shape[a]) & 1
        pads.append((lo, hi))
        new_off.append(o - lo)
    if any(p != (0, 0) for p in pads):
        arr = np.pad(arr, pads, constant_values=fill)
    return arr, new_off


def validate_diagonal_constancy(kernel: PerfectKernel, max_violations: int = 1000) -> DiagonalReport:
    """Check constancy on every off-diagonal dyadic cube coarser than the grid.

    Scales run from ``resolution - 1`` down to one scale past the point where
    the support sits inside the cubes adjacent to the origin; coarser cubes
    inherit the verdict from that scale.
    """
    body = kernel.body.trim()
    R = kernel.resolution
    box = body.support_box()
    if box is None:
        return DiagonalReport(True, [], R, R, 0)
    s_stop = covering_scale(box, R) - 1
    lo_arr = hi_arr = body.num
    offset = list(body.offset)
    report = DiagonalReport(True, [], R, s_stop, 0)
    m = kernel.m
    for s in range(R - 1, s_stop - 1, -1):
        lo_arr, off2 = _align_even(lo_arr, offset)
        hi_arr, _ = _align_even(hi_arr, offset)
        offset = [o // 2 for o in off2]
        for a in range(lo_arr.ndim):
            shp = lo_arr.shape
            new = shp[:a] + (shp[a] // 2, 2) + shp[a + 1:]
            lo_arr = lo_arr.reshape(new).min(axis=a + 1)
            hi_arr = hi_arr.reshape(new).max(axis=a + 1)
        bad = lo_arr != hi_arr
        report.cubes_checked += bad.size
        if not bad.any():
            continue
        for rel in zip(*np.nonzero(bad)):
            idx = tuple(int(r) + o for r, o in zip(rel, offset))
            if is_diagonal_block(idx, m):
                continue
            report.valid = False
            if len(report.violations) < max_violations:
                report.violations.append(DyadicCube.from_indices(s, idx))
    return report


@dataclass
class SizeReport:
    constant: Fraction
    witness: tuple[int, ...] | None
    cells_on_diagonal: int


def _pair_distance_sums(idx: np.ndarray, m: int, corners: np.ndarray) -> np.ndarray:
    """Distance sum (in cell units) at every corner of every cell; shape (cells, corners)."""
    pts = idx[:, None, :] + corners[None, :, :]
    total = np.zeros(pts.shape[:2], dtype=np.int64)
    d = idx.shape[1]
    for group in (range(m), range(m, d)):
        for a, b in itertools.combinations(group, 2):
            total += np.abs(pts[:, :, a] - pts[:, :, b])
    return total


def size_report(kernel: PerfectKernel) -> SizeReport:
    """Smallest ``C`` with ``|K| <= C * (distance sum)^(2-m-n)`` on every grid point.

    On a cell the weight ``(distance sum)^(m+n-2)`` is convex, so its sup over
    the closed cell sits at a corner; the constant is the max over nonzero
    cells of ``|K| * (max-corner distance sum)^(m+n-2)``.
    """
    d = kernel.dim
    if d < 3:
        raise ValueError("the size estimate needs m + n >= 3")
    cells = list(kernel.body.cells())
    if not cells:
        return SizeReport(Fraction(0), None, 0)
    idx = np.array([c for c, _ in cells], dtype=np.int64)
    corners = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)
    sums = _pair_distance_sums(idx, kernel.m, corners)
    worst = sums.max(axis=1)
    on_diag = int((sums.min(axis=1) == 0).sum())
    h = pow2(-kernel.resolution)
    best, witness = Fraction(0), None
    for (cell, v), w in zip(cells, worst):
        c = abs(v) * (int(w) * h) ** (d - 2)
        if c > best:
            best, witness = c, cell
    return SizeReport(best, witness, on_diag)


def size_constant(kernel: PerfectKernel) -> Fraction:
    return size_report(kernel).constant


def kernel_from_difference(kappa: StepFunction, x_box: tuple[int, int], y_box: tuple[int, int]) -> PerfectKernel:
    """Sample ``K(x1,x2,y1,y2) = kappa(x1 - x2, y1 - y2)`` cellwise on a declared box.

    Cell ``(a, b, c, d)`` takes the value of ``kappa`` on cell ``(a - b, c - d)``;
    ``x_box`` and ``y_box`` are half-open cell ranges at ``kappa``'s scale.
    """
    if kappa.dim != 2:
        raise DimensionMismatch("kappa must be two-dimensional")
    xs = np.arange(*x_box)
    ys = np.arange(*y_box)
    dx = xs[:, None] - xs[None, :]
    dy = ys[:, None] - ys[None, :]
    src = kappa.window_array(((int(dx.min()), int(dx.max()) + 1), (int(dy.min()), int(dy.max()) + 1)))
    vals = src[(dx - dx.min())[:, :, None, None], (dy - dy.min())[None, None, :, :]]
    body = StepFunction(kappa.scale, (x_box[0], x_box[0], y_box[0], y_box[0]), vals, kappa.den)
    return PerfectKernel(2, 2, body)


def counterexample_kernel(r: int, n: int) -> PerfectKernel:
    """The m = 1 kernel summing ``|I|^(1-n) h_I(x) 1_J(y1)...1_J(yn)`` over ``I = [0, 2^-k)``, ``J`` in ``[0,1)``, ``k < r``.

    Dense on ``[0,1)^(1+n)`` at scale ``r``; intended for small ``r``.
    """
    if r < 1 or n < 2:
        raise ValueError("need r >= 1 and n >= 2")
    N = 1 << r
    cells = np.arange(N)
    body = np.zeros((N,) * (1 + n), dtype=np.int64)
    for k in range(r):
        w = 1 << (r - k)
        hx = np.zeros(N, dtype=np.int64)
        hx[: w // 2] = 1
        hx[w // 2: w] = -1
        blocks = cells // w
        diag = np.ones((N,) * n, dtype=bool)
        for j in range(1, n):
            shape = [1] * n
            shape[0] = N
            b0 = blocks.reshape(shape)
            shape = [1] * n
            shape[j] = N
            diag &= b0 == blocks.reshape(shape)
        weight = 1 << (k * (n - 1))
        body += weight * hx.reshape((N,) + (1,) * n) * diag[None, ...].astype(np.int64)
    return PerfectKernel(1, n, StepFunction(r, (0,) * (1 + n), body))
