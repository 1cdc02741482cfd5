"""Dyadic rationals, dyadic intervals and dyadic cubes.

A dyadic interval of scale ``k`` and index ``l`` is ``[2^-k l, 2^-k (l+1))``.
Scales and indices may be negative, so the grid covers the whole line.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence


def _pow2(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


class DyadicRational(numbers.Rational):
    """Exact number ``mantissa * 2**exponent`` kept in canonical form.

    The mantissa is odd, or zero with exponent 0. Sums, differences and
    products stay dyadic; division by a power of two stays dyadic, any other
    division promotes to :class:`fractions.Fraction`.
    """

    __slots__ = ("_m", "_e")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        else:
            tz = (mantissa & -mantissa).bit_length() - 1
            mantissa >>= tz
            exponent += tz
        self._m = mantissa
        self._e = exponent

    @classmethod
    def from_fraction(cls, q) -> DyadicRational:
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(den.bit_length() - 1))

    @property
    def mantissa(self) -> int:
        return self._m

    @property
    def exponent(self) -> int:
        return self._e

    @property
    def numerator(self) -> int:
        return self._m << self._e if self._e >= 0 else self._m

    @property
    def denominator(self) -> int:
        return 1 if self._e >= 0 else 1 << -self._e

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __repr__(self):
        return f"DyadicRational({self._m}, {self._e})"

    def __str__(self):
        return str(self.to_fraction())

    def __hash__(self):
        return hash(self.to_fraction())

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return self._m == other._m and self._e == other._e
        if isinstance(other, (int, Fraction, numbers.Rational)):
            return self.to_fraction() == other
        return NotImplemented

    def _binary(self, other, op):
        if isinstance(other, DyadicRational):
            return op(self, other)
        if isinstance(other, int):
            return op(self, DyadicRational(other))
        if isinstance(other, numbers.Rational):
            return NotImplemented
        return NotImplemented

    # dyadic-closed operations
    def __add__(self, other):
        if isinstance(other, int):
            other = DyadicRational(other)
        if isinstance(other, DyadicRational):
            e = min(self._e, other._e)
            return DyadicRational((self._m << (self._e - e)) + (other._m << (other._e - e)), e)
        if isinstance(other, numbers.Rational):
            return self.to_fraction() + Fraction(other.numerator, other.denominator)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self._m, self._e)

    def __pos__(self):
        return self

    def __abs__(self):
        return DyadicRational(abs(self._m), self._e)

    def __sub__(self, other):
        if isinstance(other, (int, DyadicRational)):
            return self + (-DyadicRational(other) if isinstance(other, int) else -other)
        if isinstance(other, numbers.Rational):
            return self.to_fraction() - Fraction(other.numerator, other.denominator)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, int):
            other = DyadicRational(other)
        if isinstance(other, DyadicRational):
            return DyadicRational(self._m * other._m, self._e + other._e)
        if isinstance(other, numbers.Rational):
            return self.to_fraction() * Fraction(other.numerator, other.denominator)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            other = DyadicRational(other)
        if isinstance(other, DyadicRational):
            if other._m == 0:
                raise ZeroDivisionError("division by zero")
            if abs(other._m) == 1:
                return DyadicRational(self._m * other._m, self._e - other._e)
            return self.to_fraction() / other.to_fraction()
        if isinstance(other, numbers.Rational):
            return self.to_fraction() / Fraction(other.numerator, other.denominator)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, int):
            return DyadicRational(other) / self
        if isinstance(other, numbers.Rational):
            return Fraction(other.numerator, other.denominator) / self.to_fraction()
        return NotImplemented

    def __floordiv__(self, other):
        return self.to_fraction() // other

    def __rfloordiv__(self, other):
        return other // self.to_fraction()

    def __mod__(self, other):
        return self.to_fraction() % other

    def __rmod__(self, other):
        return other % self.to_fraction()

    def __pow__(self, exponent):
        if isinstance(exponent, int) and exponent >= 0:
            return DyadicRational(self._m**exponent, self._e * exponent)
        return self.to_fraction() ** exponent

    def __rpow__(self, base):
        return base ** self.to_fraction()

    def __lt__(self, other):
        return self.to_fraction() < other

    def __le__(self, other):
        return self.to_fraction() <= other

    def __gt__(self, other):
        return self.to_fraction() > other

    def __ge__(self, other):
        return self.to_fraction() >= other

    def __float__(self):
        return float(self.to_fraction())

    def __trunc__(self):
        return int(self.to_fraction())

    def __floor__(self):
        return self.to_fraction().__floor__()

    def __ceil__(self):
        return self.to_fraction().__ceil__()

    def __round__(self, ndigits=None):
        return round(self.to_fraction(), ndigits)

    def __bool__(self):
        return self._m != 0


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval ``[2^-scale * index, 2^-scale * (index + 1))``."""

    scale: int
    index: int

    @property
    def length(self) -> Fraction:
        return _pow2(-self.scale)

    @property
    def left(self) -> Fraction:
        return self.index * _pow2(-self.scale)

    @property
    def right(self) -> Fraction:
        return (self.index + 1) * _pow2(-self.scale)

    def parent(self) -> DyadicInterval:
        return DyadicInterval(self.scale - 1, self.index >> 1)

    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        return (DyadicInterval(self.scale + 1, 2 * self.index),
                DyadicInterval(self.scale + 1, 2 * self.index + 1))

    def ancestor(self, scale: int) -> DyadicInterval:
        if scale > self.scale:
            raise ValueError("ancestor scale must not be finer than the interval")
        return DyadicInterval(scale, self.index >> (self.scale - scale))

    def contains(self, other: DyadicInterval) -> bool:
        return other.scale >= self.scale and other.index >> (other.scale - self.scale) == self.index

    def intersects(self, other: DyadicInterval) -> bool:
        return self.contains(other) or other.contains(self)

    def cell_range(self, scale: int) -> tuple[int, int]:
        """Half-open range of cell indices at ``scale`` covered by the interval."""
        if scale < self.scale:
            raise ValueError("cannot express a dyadic interval with coarser cells")
        w = 1 << (scale - self.scale)
        return self.index * w, (self.index + 1) * w

    def subintervals(self, scale: int) -> Iterator[DyadicInterval]:
        lo, hi = self.cell_range(scale)
        for i in range(lo, hi):
            yield DyadicInterval(scale, i)

    def __str__(self):
        return f"[{self.left},{self.right})"


def interval_halves(interval: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    """Left and right halves of a dyadic interval."""
    return interval.children()


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Product of dyadic intervals of one common scale."""

    intervals: tuple[DyadicInterval, ...]

    def __post_init__(self):
        ivs = tuple(self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise ValueError("a dyadic cube needs at least one interval")
        if len({iv.scale for iv in ivs}) != 1:
            raise ValueError("all intervals of a dyadic cube must have the same scale")

    @classmethod
    def from_indices(cls, scale: int, indices: Sequence[int]) -> DyadicCube:
        return cls(tuple(DyadicInterval(scale, int(i)) for i in indices))

    @property
    def scale(self) -> int:
        return self.intervals[0].scale

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(iv.index for iv in self.intervals)

    @property
    def measure(self) -> Fraction:
        return _pow2(-self.scale * self.dim)

    def parent(self) -> DyadicCube:
        return DyadicCube(tuple(iv.parent() for iv in self.intervals))

    def children(self) -> list[DyadicCube]:
        kids = [()]
        for iv in self.intervals:
            kids = [k + (c,) for k in kids for c in iv.children()]
        return [DyadicCube(k) for k in kids]

    def ancestor(self, scale: int) -> DyadicCube:
        return DyadicCube(tuple(iv.ancestor(scale) for iv in self.intervals))

    def contains(self, other: DyadicCube) -> bool:
        return all(a.contains(b) for a, b in zip(self.intervals, other.intervals))

    def __str__(self):
        return "x".join(str(iv) for iv in self.intervals)


def square(scale: int, ix: int, jy: int) -> DyadicCube:
    """Dyadic square ``I x J`` of the given scale."""
    return DyadicCube((DyadicInterval(scale, ix), DyadicInterval(scale, jy)))


def unit_square() -> DyadicCube:
    return square(0, 0, 0)


def squares_at_scale(scale: int, x_range: tuple[int, int], y_range: tuple[int, int]) -> Iterator[DyadicCube]:
    for ix in range(*x_range):
        for jy in range(*y_range):
            yield square(scale, ix, jy)


def pow2(e: int) -> Fraction:
    """Exact ``2**e`` for any integer ``e``."""
    return _pow2(e)
