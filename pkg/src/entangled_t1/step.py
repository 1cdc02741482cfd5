"""Exact piecewise-constant functions on dyadic grids.

A :class:`StepFunction` at scale ``k`` in ``d`` dimensions stores an integer
array ``num`` over a box of grid cells starting at ``offset`` and a positive
integer ``den``; the value on cell ``idx`` is ``num[idx - offset] / den`` and
zero outside the box.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .dyadic import DyadicCube, DyadicInterval, pow2
from .errors import DimensionMismatch, DuplicateCell, ParseError

Box = tuple[tuple[int, int], ...]


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def _array_gcd(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    if arr.dtype == np.int64:
        return int(np.gcd.reduce(np.abs(arr).ravel()))
    return reduce(math.gcd, (int(v) for v in arr.ravel()), 0)


def fractions_to_ints(values: Iterable) -> tuple[list[int], int]:
    """Common-denominator integer numerators for a list of rationals."""
    vals = [Fraction(v) for v in values]
    den = reduce(_lcm, (v.denominator for v in vals), 1)
    return [v.numerator * (den // v.denominator) for v in vals], den


class StepFunction:
    """Exact step function constant on the cells of one dyadic grid."""

    __slots__ = ("scale", "offset", "num", "den")

    def __init__(self, scale: int, offset: Sequence[int], num, den: int = 1):
        num = K.exact(np.asarray(num))
        if num.ndim != len(offset):
            raise DimensionMismatch("offset length must equal array rank")
        den = int(den)
        if den <= 0:
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            num, den = K.scale(num, -1), -den
        g = math.gcd(_array_gcd(num), den)
        if g > 1:
            num = K.exact(num // g)
            den //= g
        self.scale = int(scale)
        self.offset = tuple(int(o) for o in offset)
        self.num = num
        self.den = den
        self.num.setflags(write=False)

    # construction
    @classmethod
    def zero(cls, dim: int, scale: int = 0) -> StepFunction:
        return cls(scale, (0,) * dim, np.zeros((0,) * dim, dtype=np.int64))

    @classmethod
    def from_cells(cls, dim: int, scale: int, cells: Mapping[Sequence[int], object]) -> StepFunction:
        """Build from a sparse ``{multi-index: value}`` map."""
        items = [(tuple(int(i) for i in idx), Fraction(v)) for idx, v in cells.items()]
        items = [(idx, v) for idx, v in items if v != 0]
        for idx, _ in items:
            if len(idx) != dim:
                raise DimensionMismatch(f"cell {idx} does not have {dim} indices")
        if not items:
            return cls.zero(dim, scale)
        lo = [min(idx[a] for idx, _ in items) for a in range(dim)]
        hi = [max(idx[a] for idx, _ in items) + 1 for a in range(dim)]
        nums, den = fractions_to_ints(v for _, v in items)
        big = max(abs(x) for x in nums) >= K.INT_LIMIT
        arr = np.zeros([h - l for l, h in zip(lo, hi)], dtype=object if big else np.int64)
        for (idx, _), x in zip(items, nums):
            arr[tuple(i - l for i, l in zip(idx, lo))] = x
        return cls(scale, lo, arr, den)

    @classmethod
    def from_values(cls, scale: int, offset: Sequence[int], values) -> StepFunction:
        """Build from a dense nested array of rationals."""
        arr = np.asarray(values, dtype=object)
        nums, den = fractions_to_ints(arr.ravel())
        return cls(scale, offset, np.array(nums, dtype=object).reshape(arr.shape), den)

    @classmethod
    def constant(cls, value, cube: DyadicCube | Sequence[DyadicInterval], scale: int | None = None) -> StepFunction:
        """``value`` times the indicator of a dyadic cube (or box of intervals)."""
        intervals = cube.intervals if isinstance(cube, DyadicCube) else tuple(cube)
        s = max(iv.scale for iv in intervals) if scale is None else scale
        ranges = [iv.cell_range(s) for iv in intervals]
        q = Fraction(value)
        shape = [h - l for l, h in ranges]
        return cls(s, [l for l, _ in ranges], np.full(shape, q.numerator, dtype=object), q.denominator)

    @classmethod
    def indicator(cls, cube, scale: int | None = None) -> StepFunction:
        return cls.constant(1, cube, scale)

    @classmethod
    def box_indicator(cls, scale: int, box: Box) -> StepFunction:
        return cls(scale, [l for l, _ in box], np.ones([h - l for l, h in box], dtype=np.int64))

    @classmethod
    def haar(cls, interval: DyadicInterval) -> StepFunction:
        """The 1D Haar function of ``interval``: +1 on its left half, -1 on its right half."""
        return cls(interval.scale + 1, (2 * interval.index,), np.array([1, -1], dtype=np.int64))

    # basic views
    @property
    def dim(self) -> int:
        return self.num.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num.shape

    @property
    def box(self) -> Box:
        return tuple((o, o + s) for o, s in zip(self.offset, self.num.shape))

    @property
    def cell_measure(self) -> Fraction:
        return pow2(-self.scale * self.dim)

    def is_zero(self) -> bool:
        return self.num.size == 0 or not self.num.any()

    def value_at(self, idx: Sequence[int]) -> Fraction:
        rel = tuple(int(i) - o for i, o in zip(idx, self.offset))
        if any(r < 0 or r >= s for r, s in zip(rel, self.num.shape)):
            return Fraction(0)
        return Fraction(int(self.num[rel]), self.den)

    def __call__(self, *point) -> Fraction:
        """Value at a point given by rational coordinates."""
        if len(point) != self.dim:
            raise DimensionMismatch("point dimension mismatch")
        f = pow2(self.scale)
        return self.value_at([math.floor(Fraction(p) * f) for p in point])

    def cells(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        """Nonzero cells in lexicographic order."""
        for rel in zip(*np.nonzero(self.num)):
            idx = tuple(int(r) + o for r, o in zip(rel, self.offset))
            yield idx, Fraction(int(self.num[rel]), self.den)

    def support_box(self) -> Box | None:
        """Tight cell box around the nonzero cells, or ``None`` if zero."""
        if self.is_zero():
            return None
        out = []
        for a in range(self.dim):
            other = tuple(b for b in range(self.dim) if b != a)
            nz = np.nonzero(self.num.any(axis=other) if other else self.num.astype(bool))[0]
            out.append((int(nz[0]) + self.offset[a], int(nz[-1]) + 1 + self.offset[a]))
        return tuple(out)

    def trim(self) -> StepFunction:
        box = self.support_box()
        if box is None:
            return StepFunction.zero(self.dim, self.scale)
        return self.window(box)

    def __repr__(self):
        return f"StepFunction(dim={self.dim}, scale={self.scale}, box={self.box}, den={self.den})"

    # grid changes
    def refine(self, scale: int) -> StepFunction:
        """Same function written on the finer grid of ``scale``."""
        if scale < self.scale:
            raise ValueError("refine cannot coarsen; use coarsen()")
        if scale == self.scale:
            return self
        w = 1 << (scale - self.scale)
        arr = self.num
        for a in range(self.dim):
            arr = np.repeat(arr, w, axis=a)
        return StepFunction(scale, [o * w for o in self.offset], arr, self.den)

    def coarsen(self) -> StepFunction | None:
        """Same function one scale coarser, or ``None`` if it is not constant on parent cells."""
        box = [(o >> 1, -((-(o + s)) >> 1)) for o, s in zip(self.offset, self.num.shape)]
        f = self.window(tuple((2 * l, 2 * h) for l, h in box))
        arr = f.num
        for a in range(self.dim):
            first = np.take(arr, np.arange(0, arr.shape[a], 2), axis=a)
            second = np.take(arr, np.arange(1, arr.shape[a], 2), axis=a)
            if not np.array_equal(first, second):
                return None
            arr = first
        return StepFunction(self.scale - 1, [l for l, _ in box], arr, self.den)

    def minimal(self) -> StepFunction:
        """Coarsest exact representation (trimmed)."""
        f = self.trim()
        if f.is_zero():
            return StepFunction.zero(self.dim, 0)
        while True:
            g = f.coarsen()
            if g is None:
                return f
            f = g

    def window(self, box: Box) -> StepFunction:
        """Restrict or zero-pad to the cell box ``box`` (at the current scale)."""
        return StepFunction(self.scale, [l for l, _ in box], self.window_array(box), self.den)

    def window_array(self, box: Box) -> np.ndarray:
        if len(box) != self.dim:
            raise DimensionMismatch("box dimension mismatch")
        shape = [h - l for l, h in box]
        if tuple(self.box) == tuple(box):
            return self.num
        out = np.zeros(shape, dtype=self.num.dtype)
        src, dst = [], []
        for (l, h), o, s in zip(box, self.offset, self.num.shape):
            lo, hi = max(l, o), min(h, o + s)
            if lo >= hi:
                return out
            src.append(slice(lo - o, hi - o))
            dst.append(slice(lo - l, hi - l))
        out[tuple(dst)] = self.num[tuple(src)]
        return out

    def translate(self, shift: Sequence[int]) -> StepFunction:
        """Shift by ``shift`` cells of the current scale along each axis."""
        return StepFunction(self.scale, [o + int(s) for o, s in zip(self.offset, shift)], self.num, self.den)

    def dilate(self, times: int = 1) -> StepFunction:
        """``x -> F(2^times x)`` (same cell indices, finer scale)."""
        return StepFunction(self.scale + times, self.offset, self.num, self.den)

    def transpose(self, axes: Sequence[int]) -> StepFunction:
        return StepFunction(self.scale, [self.offset[a] for a in axes], np.transpose(self.num, axes), self.den)

    # arithmetic
    def _aligned(self, other: StepFunction) -> tuple[int, Box, np.ndarray, np.ndarray]:
        if self.dim != other.dim:
            raise DimensionMismatch("step functions of different dimension")
        s = max(self.scale, other.scale)
        f, g = self.refine(s), other.refine(s)
        if f.num.size == 0:
            box = g.box
        elif g.num.size == 0:
            box = f.box
        else:
            box = tuple((min(a, c), max(b, d)) for (a, b), (c, d) in zip(f.box, g.box))
        return s, box, f.window_array(box), g.window_array(box)

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        s, box, a, b = self._aligned(other)
        den = _lcm(self.den, other.den)
        num = K.add(K.scale(a, den // self.den), K.scale(b, den // other.den))
        return StepFunction(s, [l for l, _ in box], num, den)

    def __neg__(self):
        return StepFunction(self.scale, self.offset, K.scale(self.num, -1), self.den)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            if self.dim != other.dim:
                raise DimensionMismatch("step functions of different dimension")
            s = max(self.scale, other.scale)
            f, g = self.refine(s), other.refine(s)
            box = tuple((max(a, c), min(b, d)) for (a, b), (c, d) in zip(f.box, g.box))
            box = tuple((l, max(l, h)) for l, h in box)
            num = K.mul(f.window_array(box), g.window_array(box))
            return StepFunction(s, [l for l, _ in box], num, self.den * other.den)
        q = Fraction(other)
        return StepFunction(self.scale, self.offset, K.scale(self.num, q.numerator), self.den * q.denominator)

    __rmul__ = __mul__

    def __truediv__(self, c):
        q = Fraction(c)
        if q == 0:
            raise ZeroDivisionError("division of a step function by zero")
        return self * (1 / q)

    def __abs__(self):
        num = np.abs(self.num) if self.num.dtype == np.int64 else np.vectorize(abs, otypes=[object])(self.num)
        return StepFunction(self.scale, self.offset, num, self.den)

    def power(self, p: int) -> StepFunction:
        if p < 0:
            raise ValueError("negative powers are not supported")
        out = StepFunction(self.scale, self.offset, np.ones(self.num.shape, dtype=np.int64))
        for _ in range(p):
            out = out * self
        return out

    def equals(self, other: StepFunction) -> bool:
        """Exact equality as functions (independent of grid and box)."""
        if self.dim != other.dim:
            return False
        _, _, a, b = self._aligned(other)
        return bool(np.array_equal(K.scale(a, other.den), K.scale(b, self.den)))

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def max_abs(self) -> Fraction:
        return Fraction(K.max_abs(self.num), self.den)

    # integrals and pairings
    def integral(self) -> Fraction:
        return Fraction(K.total(self.num), self.den) * self.cell_measure

    def integral_over(self, cube: DyadicCube | Sequence[DyadicInterval]) -> Fraction:
        intervals = cube.intervals if isinstance(cube, DyadicCube) else tuple(cube)
        return self.average(dict(enumerate(intervals))) * math.prod(iv.length for iv in intervals)

    def sum_window(self, box: Box) -> Fraction:
        """Sum of the cell values over a cell box, as a rational."""
        return Fraction(K.total(self.window_array(box)), self.den)

    def _reduce_axis(self, arr: np.ndarray, axis: int, interval: DyadicInterval, haar: bool) -> tuple[np.ndarray, int]:
        lo, hi = interval.cell_range(self.scale)
        o, s = self.offset[axis], arr.shape[axis]
        if haar:
            mid = (lo + hi) // 2
            parts = [(lo, mid, 1), (mid, hi, -1)]
        else:
            parts = [(lo, hi, 1)]
        out = None
        for a, b, sign in parts:
            a2, b2 = max(a, o), min(b, o + s)
            if a2 < b2:
                piece = K.total(np.take(arr, np.arange(a2 - o, b2 - o), axis=axis), axis=axis)
            else:
                piece = np.zeros(arr.shape[:axis] + arr.shape[axis + 1:], dtype=np.int64)
            piece = K.scale(piece, sign)
            out = piece if out is None else K.add(out, piece)
        return out, hi - lo

    def _pair(self, bindings: Mapping[int, DyadicInterval], haar_axes: set[int]):
        for a in bindings:
            if not 0 <= a < self.dim:
                raise IndexError(f"axis {a} out of range for dimension {self.dim}")
        need = max([iv.scale + (1 if a in haar_axes else 0) for a, iv in bindings.items()] + [self.scale])
        f = self.refine(need)
        arr, den = f.num, f.den
        for a in sorted(bindings, reverse=True):
            arr, w = f._reduce_axis(arr, a, bindings[a], a in haar_axes)
            den *= w
        rest = [a for a in range(self.dim) if a not in bindings]
        if not rest:
            return Fraction(int(np.asarray(arr).item()), den)
        return StepFunction(f.scale, [f.offset[a] for a in rest], arr, den)

    def average(self, bindings: Mapping[int, DyadicInterval]):
        """Average over the bound axes; a rational if every axis is bound."""
        return self._pair(bindings, set())

    def haar_average(self, axis: int, interval: DyadicInterval):
        """Normalized pairing with ``h_interval`` along ``axis``."""
        return self._pair({axis: interval}, {axis})

    def pair(self, bindings: Mapping[int, DyadicInterval], haar_axes: Iterable[int] = ()):
        """Mixed bracket: Haar pairing on ``haar_axes``, plain average on the other bound axes."""
        return self._pair(bindings, set(haar_axes))

    # I/O
    def to_text(self) -> str:
        lines = [f"STEP d={self.dim} scale={self.scale}"]
        for idx, v in self.cells():
            lines.append(" ".join(str(i) for i in idx) + f" {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> StepFunction:
        header, body = _split_header(text, "STEP")
        dim, scale = int(header["d"]), int(header["scale"])
        cells = _parse_cells(body, dim)
        return cls.from_cells(dim, scale, cells)


def tensor(*factors: StepFunction) -> StepFunction:
    """Outer product ``f1(x1) f2(x2) ...`` on the product grid."""
    s = max(f.scale for f in factors)
    fs = [f.refine(s) for f in factors]
    ops, out = [], []
    for k, f in enumerate(fs):
        lab = [(k, a) for a in range(f.dim)]
        ops.append((f.num, lab))
        out.extend(lab)
    num = K.product_sum(ops, out)
    return StepFunction(s, [o for f in fs for o in f.offset], num, math.prod(f.den for f in fs))


def common_scale(functions: Iterable[StepFunction]) -> int:
    return max(f.scale for f in functions)


def parse_rational(token: str, line: int | None = None) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {token!r}", line) from exc


def _split_header(text: str, tag: str) -> tuple[dict[str, str], list[tuple[int, list[str]]]]:
    rows = [(n, ln.split()) for n, ln in enumerate(text.splitlines(), 1)]
    rows = [(n, toks) for n, toks in rows if toks and not toks[0].startswith("#")]
    if not rows or rows[0][1][0] != tag:
        raise ParseError(f"expected header starting with {tag}", rows[0][0] if rows else 1)
    n0, head = rows[0]
    fields = {}
    for tok in head[1:]:
        if "=" not in tok:
            raise ParseError(f"bad header field {tok!r}", n0)
        k, v = tok.split("=", 1)
        fields[k] = v
    return fields, rows[1:]


def _parse_cells(body, dim: int) -> dict[tuple[int, ...], Fraction]:
    cells: dict[tuple[int, ...], Fraction] = {}
    for n, toks in body:
        if len(toks) != dim + 1:
            raise ParseError(f"expected {dim} indices and a value", n)
        try:
            idx = tuple(int(t) for t in toks[:dim])
        except ValueError as exc:
            raise ParseError("cell indices must be integers", n) from exc
        if idx in cells:
            raise DuplicateCell(f"duplicate cell {idx}", n)
        cells[idx] = parse_rational(toks[dim], n)
    return cells
