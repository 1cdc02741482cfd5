"""Values of the form ``base ** power`` with rational base and power.

Only the counterexample uses these: its functions take values
``(2^l / (l (l+1)))^(1/n)`` and every integrand multiplies ``n`` equal
factors, so products collapse back to exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import IrrationalResult, MixedBases


@dataclass(frozen=True)
class RadicalValue:
    base: Fraction
    power: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "base", Fraction(self.base))
        object.__setattr__(self, "power", Fraction(self.power))
        if self.base < 0:
            raise ValueError("RadicalValue base must be nonnegative")

    @property
    def is_zero(self) -> bool:
        return self.base == 0 and self.power > 0

    def as_rational(self) -> Fraction:
        """Exact value when it is rational, else :class:`IrrationalResult`."""
        return radical_product([self])

    def __float__(self):
        return float(self.base) ** float(self.power)


def _exact_root(q: Fraction, k: int) -> Fraction | None:
    """``q ** (1/k)`` if it is rational, else ``None``."""

    def iroot(a: int) -> int | None:
        if a < 2:
            return a
        x = int(round(a ** (1.0 / k)))
        for c in (x - 1, x, x + 1):
            if c >= 0 and c**k == a:
                return c
        # float estimate may be off for huge integers; fall back to bisection
        lo, hi = 0, 1 << (a.bit_length() // k + 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**k < a:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo**k == a else None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _rational_power(base: Fraction, power: Fraction) -> Fraction:
    if base == 0:
        if power > 0:
            return Fraction(0)
        raise ZeroDivisionError("zero base with nonpositive power")
    if power.denominator == 1:
        return base ** power.numerator
    root = _exact_root(base, power.denominator)
    if root is None:
        raise IrrationalResult(f"({base})^({power}) is irrational")
    return root ** power.numerator


def radical_product(values: Iterable[RadicalValue]) -> Fraction:
    """Multiply radical values and return the exact rational product.

    Factors sharing a base add their powers. If all factors share one base
    the collapsed power must give a rational value; if several bases occur
    every power must be an integer. A zero factor makes the product zero.
    """
    values = list(values)
    if any(v.is_zero for v in values):
        return Fraction(0)
    bases = {v.base for v in values if v.power != 0}
    if not bases:
        return Fraction(1)
    if len(bases) == 1:
        (base,) = bases
        total = sum((v.power for v in values if v.power != 0), Fraction(0))
        return _rational_power(base, total)
    if any(v.power.denominator != 1 for v in values):
        raise MixedBases("distinct bases with fractional powers")
    out = Fraction(1)
    for v in values:
        out *= _rational_power(v.base, v.power)
    return out
