"""The degenerate star graph: T(1)-type hypotheses hold while the form blows up.

Graph: one x-vertex joined to ``n`` y-vertices. Kernel:
``K = sum_{k<r} sum_{J in D_k, J in [0,1)} |I_k|^(1-n) h_{I_k}(x) 1_J(y_1)...1_J(y_n)``
with ``I_k = [0, 2^-k)``. Every input is the same function of ``x`` alone,
``(2^l / (l(l+1)))^(1/n)`` on ``[2^-l, 2^-l+1)`` for ``l = 1..r``; the ``n``
equal factors multiply back to a rational in every cell.

Structured evaluation works band by band, so ``r`` up to 24 is cheap; dense
grids are only used as an oracle for small ``r``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import pow2, square
from .form import evaluate_form
from .graph import Signature, star_graph
from .kernel import counterexample_kernel
from .paraproduct import HaarCoefficientField, coeff_norms, evaluate_paraproduct
from .radical import RadicalValue, radical_product
from .step import StepFunction
from .t1 import weak_boundedness_scan


@dataclass(frozen=True)
class CounterexampleConfig:
    r: int
    n: int = 2

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be a positive integer")
        if self.n < 2:
            raise ValueError("n must be at least 2")


@dataclass(frozen=True)
class BandFunction:
    """``value[l]`` on ``[2^-l, 2^-l+1) x [0, 1)`` for ``l = 1..r``, zero elsewhere."""

    r: int
    bands: tuple[RadicalValue, ...]

    def value(self, l: int) -> RadicalValue:
        return self.bands[l - 1]


def build_functions(cfg: CounterexampleConfig) -> list[BandFunction]:
    bands = tuple(RadicalValue(Fraction(2**l, l * (l + 1)), Fraction(1, cfg.n)) for l in range(1, cfg.r + 1))
    f = BandFunction(cfg.r, bands)
    return [f] * cfg.n


def band_products(fs: list[BandFunction]) -> list[Fraction]:
    """Per band, the product of the ``n`` input values (exact; raises if irrational)."""
    r = fs[0].r
    return [radical_product(f.value(l) for f in fs) for l in range(1, r + 1)]


def band_integrals(fs: list[BandFunction]) -> list[Fraction]:
    """``int_{band l} prod_j F_j(x, y_j) dx dy_1...dy_n`` (the y-integrals are 1)."""
    return [p * pow2(-l) for l, p in enumerate(band_products(fs), 1)]


def norm_power(f: BandFunction, n: int) -> Fraction:
    """``||f||_{L^n}^n``."""
    return sum((radical_product([f.value(l)] * n) * pow2(-l) for l in range(1, f.r + 1)), Fraction(0))


def structured_form(cfg: CounterexampleConfig, fs: list[BandFunction] | None = None) -> Fraction:
    """``Lambda`` as a sum over the kernel's squares ``I_k x J``.

    The bracket on ``I_k x J`` is the Haar average over ``I_k`` of the band
    product (the y-averages are 1), the same for all ``2^k`` squares ``J``,
    so scale ``k`` contributes ``2^k |I_k|^2`` times it, which is the left-half
    integral minus the right-half integral over ``I_k``.
    """
    fs = fs or build_functions(cfg)
    ints = band_integrals(fs)
    r = cfg.r
    # suffix[l] = sum of band integrals for bands l..r (bands inside [0, 2^-l+1))
    suffix = [Fraction(0)] * (r + 2)
    for l in range(r, 0, -1):
        suffix[l] = suffix[l + 1] + ints[l - 1]
    total = Fraction(0)
    for k in range(r):
        left = suffix[k + 2] if k + 2 <= r else Fraction(0)
        right = ints[k] if k + 1 <= r else Fraction(0)
        total += left - right
    return total


def stated_closed_form(r: int) -> Fraction:
    """Closed form with an extra final ``+ 1/(r+2)``, kept for comparison with the corrected one."""
    return sum((Fraction(1, k + 2) for k in range(r)), Fraction(0)) - Fraction(r - 1, r + 1) - 1 + Fraction(1, r + 2)


def corrected_closed_form(r: int) -> Fraction:
    """``sum_{k<r} 1/(k+2) - (r-1)/(r+1) - 1``, the value the band sums actually give."""
    return sum((Fraction(1, k + 2) for k in range(r)), Fraction(0)) - Fraction(r - 1, r + 1) - 1


def counterexample_field(r: int, n: int) -> HaarCoefficientField:
    """Coefficients 1 on ``I_k x J`` for ``J`` of scale ``k`` in ``[0, 1)``, ``k < r``."""
    s = Signature((True,), (False,) * n)
    coeffs = {square(k, 0, j): Fraction(1) for k in range(r) for j in range(1 << k)}
    return HaarCoefficientField(s, coeffs)


def structured_bmo_squared(r: int) -> Fraction:
    """Coefficient bmo squared; the sup is at ``Q0 = [0,1)^2``: ``sum_{k<r} 2^k 4^-k``."""
    return sum((pow2(-k) for k in range(r)), Fraction(0))


def structured_wbp(r: int, n: int) -> tuple[Fraction, tuple[int, int]]:
    """``sup_Q |Lambda(1_Q, ..., 1_Q)| / |Q|`` and the maximizing ``(scale, x-index)``.

    For ``Q = I' x J'`` with ``J'`` in ``[0,1)`` of scale ``s``, only ``k < s``
    with ``I'`` strictly inside ``I_k`` contribute, each ``+-2^(k(n-1)) 2^(-s(n+1))``.
    Any sign pattern is dominated by the all-plus one at ``I' = [0, 2^-s)``,
    so the sup is over ``s`` alone.
    """
    best, arg = Fraction(0), (0, 0)
    for s in range(0, r + 2):
        val = sum((pow2((k - s) * (n - 1)) for k in range(min(r, s))), Fraction(0))
        if val > best:
            best, arg = val, (s, 0)
    return best, arg


def wbp_by_sign_patterns(r: int, n: int, s: int) -> Fraction:
    """Exhaustive max over every ``x``-index at scale ``s`` of the same closed form."""
    best = Fraction(0)
    for a in range(1 << s):
        val = Fraction(0)
        for k in range(min(r, s)):
            if a < (1 << (s - k)):
                sign = -1 if (a >> (s - k - 1)) & 1 else 1
                val += sign * pow2((k - s) * (n - 1))
        best = max(best, abs(val))
    return best


def size_bound(n: int) -> Fraction:
    return 1 / (1 - pow2(1 - n))


def structured_size_constant(r: int, n: int) -> Fraction:
    """``sup |K| (max_{i,j} |y_i - y_j|)^(n-1)`` by the scale ``kappa`` at which the y's split.

    If the y's share a scale-``kappa`` interval but not a finer one, at most
    the terms ``k <= kappa`` survive and the largest pair distance is below
    ``2^-kappa``; ``kappa = r`` covers points inside one grid cell (closed-cell
    diameter ``2^-r``).
    """
    best = Fraction(0)
    for kappa in range(r + 1):
        mass = sum((pow2(k * (n - 1)) for k in range(min(kappa + 1, r))), Fraction(0))
        best = max(best, mass * pow2(-kappa * (n - 1)))
    return best


def dense_size_constant(r: int, n: int) -> Fraction:
    """The same sup on the dense grid, using the farthest corners of each closed cell."""
    K = counterexample_kernel(r, n)
    best = Fraction(0)
    for idx, v in K.body.cells():
        ys = idx[1:]
        dist = max(ys) - min(ys) + 1
        best = max(best, abs(v) * pow2(-r * (n - 1)) * dist ** (n - 1))
    return best


def dense_inputs(cfg: CounterexampleConfig) -> dict[tuple[int, int], StepFunction]:
    """Rational stand-ins with the same cellwise product: ``f^n`` on one edge, the support indicator elsewhere."""
    r, n = cfg.r, cfg.n
    prods = band_products(build_functions(cfg))
    N = 1 << r
    col = np.zeros(N, dtype=object)
    ind = np.zeros(N, dtype=object)
    for l, p in enumerate(prods, 1):
        lo, hi = N >> l, N >> (l - 1)
        col[lo:hi] = p
        ind[lo:hi] = 1
    first = StepFunction.from_values(r, (0, 0), np.repeat(col[:, None], N, axis=1))
    rest = StepFunction.from_values(r, (0, 0), np.repeat(ind[:, None], N, axis=1))
    return {(1, j): (first if j == 1 else rest) for j in range(1, n + 1)}


def dense_form(cfg: CounterexampleConfig) -> Fraction:
    return evaluate_form(counterexample_kernel(cfg.r, cfg.n), star_graph(cfg.n), dense_inputs(cfg))


def paraproduct_form(cfg: CounterexampleConfig) -> Fraction:
    """Same value through the generic paraproduct evaluator (moderate ``r`` only)."""
    return evaluate_paraproduct(counterexample_field(cfg.r, cfg.n), star_graph(cfg.n), dense_inputs(cfg))


@dataclass
class CounterexampleReport:
    r: int
    n: int
    form: Fraction
    stated_closed_form: Fraction
    corrected_closed_form: Fraction
    matches_stated: bool
    matches_corrected: bool
    norm_power: Fraction
    norm_ok: bool
    bmo_squared: Fraction
    bmo_ok: bool
    wbp_ratio: Fraction
    wbp_ok: bool
    size_constant: Fraction
    size_ok: bool
    dense_form: Fraction | None = None
    dense_ok: bool | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def hypotheses_hold(self) -> bool:
        return self.bmo_ok and self.wbp_ok and self.size_ok and self.norm_ok


def run(cfg: CounterexampleConfig, dense_check: bool | None = None, generic_limit: int = 3) -> CounterexampleReport:
    """Assemble every quantity for one ``(r, n)``.

    ``dense_check`` defaults to on for ``r <= 3``. For ``r <= generic_limit`` the
    structured bmo, WBP and size values are also recomputed by the generic
    routines and the agreement is stored in ``checks``.
    """
    r, n = cfg.r, cfg.n
    fs = build_functions(cfg)
    lam = structured_form(cfg, fs)
    stated, corrected = stated_closed_form(r), corrected_closed_form(r)
    normp = norm_power(fs[0], n)
    bmo = structured_bmo_squared(r)
    wbp, _ = structured_wbp(r, n)
    size = structured_size_constant(r, n)
    rep = CounterexampleReport(
        r, n, lam, stated, corrected, lam == stated, lam == corrected,
        normp, normp == 1 - Fraction(1, r + 1),
        bmo, bmo == 2 - pow2(1 - r) and bmo <= 2,
        wbp, wbp <= 1,
        size, size <= size_bound(n),
    )
    if dense_check is None:
        dense_check = r <= 3
    if dense_check:
        rep.dense_form = dense_form(cfg)
        rep.dense_ok = rep.dense_form == lam
    if r <= generic_limit:
        K = counterexample_kernel(r, n)
        rep.checks["bmo_generic"] = coeff_norms(counterexample_field(r, n))[1] == bmo
        rep.checks["wbp_generic"] = weak_boundedness_scan(K, square(0, 0, 0), r + 1).max_ratio == wbp
        rep.checks["size_generic"] = dense_size_constant(r, n) == size
        rep.checks["paraproduct_generic"] = paraproduct_form(cfg) == lam
    rep.checks["wbp_sign_patterns"] = all(wbp_by_sign_patterns(r, n, s) <= wbp for s in range(min(r + 2, 12)))
    return rep


@dataclass
class DivergenceRow:
    r: int
    form: Fraction
    norm_power: Fraction
    ratio: Fraction
    bmo_squared: Fraction
    wbp_ratio: Fraction
    hypotheses_hold: bool


def divergence_table(r_max: int, n: int = 2) -> list[DivergenceRow]:
    """Rows ``r = 1..r_max``; ``ratio`` is ``Lambda / prod ||F||_n`` (the norms are rational here)."""
    if r_max > 24:
        raise ValueError("r_max is limited to 24")
    rows = []
    for r in range(1, r_max + 1):
        rep = run(CounterexampleConfig(r, n), dense_check=False, generic_limit=0)
        # prod_j ||F_j||_n = (||F||_n^n)^(n/n)
        rows.append(DivergenceRow(r, rep.form, rep.norm_power, rep.form / rep.norm_power, rep.bmo_squared,
                                  rep.wbp_ratio, rep.hypotheses_hold))
    return rows


def increments_positive(rows: list[DivergenceRow], start: int = 2) -> bool:
    vals = [row.form for row in rows if row.r >= start]
    return all(b > a for a, b in zip(vals, vals[1:]))


def log_growth_fit(rows: list[DivergenceRow]) -> tuple[float, float]:
    """Least-squares ``Lambda ~ a log r + b`` (display only)."""
    xs = np.array([math.log(row.r) for row in rows])
    ys = np.array([float(row.form) for row in rows])
    a, b = np.polyfit(xs, ys, 1)
    return float(a), float(b)


def _q(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def table_csv(rows: list[DivergenceRow], decimal: int | None = None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    head = ["r", "form", "norm_power", "ratio", "bmo_squared", "wbp_ratio", "hypotheses_hold"]
    if decimal:
        head.append("form_decimal")
    w.writerow(head)
    for row in rows:
        line = [row.r, _q(row.form), _q(row.norm_power), _q(row.ratio), _q(row.bmo_squared),
                _q(row.wbp_ratio), str(row.hypotheses_hold).lower()]
        if decimal:
            line.append(f"{float(row.form):.{decimal}f}")
        w.writerow(line)
    return out.getvalue()


def report_csv(rep: CounterexampleReport) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["quantity", "value"])
    for key, val in asdict(rep).items():
        if key == "checks":
            for name, ok in val.items():
                w.writerow([f"check_{name}", str(ok).lower()])
            continue
        if isinstance(val, Fraction):
            val = _q(val)
        elif isinstance(val, bool):
            val = str(val).lower()
        elif val is None:
            val = ""
        w.writerow([key, val])
    return out.getvalue()
