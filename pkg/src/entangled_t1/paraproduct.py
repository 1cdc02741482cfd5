"""Haar coefficients of perfect kernels and the entangled paraproducts they drive.

For a signature ``s`` and a dyadic square ``Q = I x J`` the coefficient is
``lambda_Q = |Q|^-1 <K, a_I (x) ... (x) b_J>`` with ``a``/``b`` the indicator or
Haar function per axis, and the paraproduct is ``sum_Q lambda_Q |Q| A_Q`` where
``A_Q`` is the mixed Haar/average bracket of the product of the inputs.

Coefficient fields of compactly supported kernels have a coarse tail: below
the scale at which the support sits inside the four squares touching the
origin, each of those squares carries ``lambda = sign * M * 4^k`` with a fixed
mass ``M``. The tail is stored in closed form and summed exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels as K_
from .dyadic import DyadicCube, pow2, square
from .errors import DimensionMismatch, ParseError, ZeroDenominator
from .graph import BipartiteGraph, Edge, Signature, all_signatures
from .kernel import PerfectKernel, covering_scale
from .step import Box, StepFunction, _split_header

QUADRANTS = ((-1, -1), (-1, 0), (0, -1), (0, 0))


def _sq(k: int, ix: int, jy: int) -> DyadicCube:
    return square(k, ix, jy)


def _key(Q: DyadicCube) -> tuple[int, int, int]:
    return Q.scale, Q.intervals[0].index, Q.intervals[1].index


@dataclass
class HaarCoefficientField:
    """Coefficients of one signature: explicit squares plus an optional coarse tail."""

    signature: Signature
    coeffs: dict[DyadicCube, Fraction] = field(default_factory=dict)
    coarse_scale: int | None = None
    coarse_mass: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {Q: Fraction(v) for Q, v in self.coeffs.items() if v != 0}
        self.coarse_mass = {q: Fraction(v) for q, v in self.coarse_mass.items() if v != 0}
        for Q in self.coeffs:
            if Q.dim != 2:
                raise DimensionMismatch("coefficients live on dyadic squares")
        if not self.coarse_mass:
            self.coarse_scale = None

    @property
    def m(self) -> int:
        return self.signature.m

    @property
    def n(self) -> int:
        return self.signature.n

    @property
    def has_tail(self) -> bool:
        return bool(self.coarse_mass)

    def tail_sign(self, q: tuple[int, int]) -> int:
        """Sign of the Haar pairings on the negative-side squares of the tail."""
        sx = (-1) ** len(self.signature.S) if q[0] < 0 else 1
        sy = (-1) ** len(self.signature.T) if q[1] < 0 else 1
        return sx * sy

    def tail_coefficient(self, k: int, q: tuple[int, int]) -> Fraction:
        return self.tail_sign(q) * self.coarse_mass.get(q, Fraction(0)) * pow2(2 * k)

    def coefficient(self, Q: DyadicCube) -> Fraction:
        if Q in self.coeffs:
            return self.coeffs[Q]
        k, ix, jy = _key(Q)
        if self.has_tail and k < self.coarse_scale and (ix, jy) in self.coarse_mass:
            return self.tail_coefficient(k, (ix, jy))
        return Fraction(0)

    def squares_at(self, k: int) -> dict[DyadicCube, Fraction]:
        """All nonzero coefficients at scale ``k``, tail included."""
        out = {Q: v for Q, v in self.coeffs.items() if Q.scale == k}
        if self.has_tail and k < self.coarse_scale:
            for q in self.coarse_mass:
                out[_sq(k, *q)] = self.tail_coefficient(k, q)
        return out

    def scaled(self, c) -> HaarCoefficientField:
        c = Fraction(c)
        return HaarCoefficientField(self.signature, {Q: c * v for Q, v in self.coeffs.items()},
                                    self.coarse_scale, {q: c * v for q, v in self.coarse_mass.items()})

    def to_text(self) -> str:
        head = f"COEFF m={self.m} n={self.n} sig={self.signature.code()}"
        if self.has_tail:
            head += f" coarse={self.coarse_scale}"
        lines = [head]
        for Q in sorted(self.coeffs, key=_key):
            v = self.coeffs[Q]
            k, ix, jy = _key(Q)
            lines.append(f"{k} {ix} {jy} {v.numerator}/{v.denominator}")
        for q in sorted(self.coarse_mass):
            v = self.coarse_mass[q]
            lines.append(f"tail {q[0]} {q[1]} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> HaarCoefficientField:
        header, body = _split_header(text, "COEFF")
        try:
            m = int(header["m"])
            sig = Signature.parse(header["sig"], m)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad COEFF header: {exc}", 1) from exc
        if sig.n != int(header.get("n", sig.n)):
            raise ParseError("signature length does not match m + n", 1)
        coeffs, mass = {}, {}
        for ln, toks in body:
            try:
                if toks[0] == "tail":
                    mass[(int(toks[1]), int(toks[2]))] = Fraction(toks[3])
                    continue
                k, ix, jy = (int(t) for t in toks[:3])
                val = Fraction(toks[3])
            except (ValueError, IndexError, ZeroDivisionError) as exc:
                raise ParseError("expected '<k> <ix> <jy> <num>/<den>'", ln) from exc
            Q = _sq(k, ix, jy)
            if Q in coeffs:
                raise ParseError(f"duplicate square {(k, ix, jy)}", ln)
            coeffs[Q] = val
        coarse = int(header["coarse"]) if "coarse" in header else None
        if mass and coarse is None:
            raise ParseError("tail lines need a coarse=<k> header field", 1)
        return cls(sig, coeffs, coarse, mass)


def _aligned_box(box: Box, width: int) -> Box:
    return tuple(((lo // width) * width, -((-hi) // width) * width) for lo, hi in box)


@dataclass
class Decomposition:
    fields: dict[Signature, HaarCoefficientField]
    off_diagonal: dict[Signature, dict[DyadicCube, Fraction]]
    finest_scale: int
    coarse_scale: int | None
    # unequal-interval cubes examined in full mode, zero or not
    off_diagonal_checked: int = 0


def haar_decomposition(kernel: PerfectKernel, signatures: Iterable[Signature] | None = None,
                       full: bool = False) -> Decomposition:
    """Coefficient fields for the given signatures (default: all of them).

    Explicit scales run from the covering scale of the support down to
    ``resolution - 1``. With ``full`` set, coefficients on cubes whose x- or
    y-intervals differ are also computed and every nonzero one is returned in
    ``off_diagonal``.
    """
    m, n = kernel.m, kernel.n
    d = m + n
    sigs = list(signatures) if signatures is not None else list(all_signatures(m, n))
    body = kernel.body.trim()
    R = kernel.resolution
    box = body.support_box()
    coeffs = {s: {} for s in sigs}
    off = {s: {} for s in sigs}
    if box is None:
        return Decomposition({s: HaarCoefficientField(s) for s in sigs}, off, R, None)
    kc = covering_scale(box, R)
    norm = Fraction(1, body.den) * pow2(-R * d)
    checked = 0
    for k in range(kc, R):
        W = 1 << (R - k)
        abox = _aligned_box(box, W)
        base = body.window_array(abox)
        offs = [lo // W for lo, _ in abox]
        cache: dict[tuple[bool, ...], np.ndarray] = {(): base}
        scale_k = norm * pow2(2 * k)
        for s in sigs:
            flags = s.flags
            for t in range(1, d + 1):
                if flags[:t] not in cache:
                    cache[flags[:t]] = K_.block_pair(cache[flags[: t - 1]], t - 1, W, flags[t - 1])
            blocks = cache[flags]
            if full:
                ends = [hi // W for _, hi in abox]
                nx = max(0, min(ends[:m]) - max(offs[:m]))
                ny = max(0, min(ends[m:]) - max(offs[m:]))
                checked += blocks.size - nx * ny
            for rel in zip(*np.nonzero(blocks)):
                idx = tuple(int(r) + o for r, o in zip(rel, offs))
                val = int(blocks[rel]) * scale_k
                xs, ys = idx[:m], idx[m:]
                if len(set(xs)) == 1 and len(set(ys)) == 1:
                    coeffs[s][_sq(k, xs[0], ys[0])] = val
                elif full:
                    off[s][DyadicCube.from_indices(k, idx)] = val
    # quadrant masses for the closed-form tail below the covering scale
    W = 1 << (R - kc + 1)
    abox = _aligned_box(box, W)
    blocks = body.window_array(abox)
    for a in range(d):
        blocks = K_.block_pair(blocks, a, W, False)
    offs = [lo // W for lo, _ in abox]
    mass = {}
    for q in QUADRANTS:
        idx = (q[0],) * m + (q[1],) * n
        rel = tuple(i - o for i, o in zip(idx, offs))
        if all(0 <= r < s for r, s in zip(rel, blocks.shape)):
            mass[q] = int(blocks[rel]) * norm
    fields = {s: HaarCoefficientField(s, coeffs[s], kc, mass) for s in sigs}
    return Decomposition(fields, off, R, kc, checked)


def haar_coefficients(kernel: PerfectKernel, s: Signature) -> HaarCoefficientField:
    return haar_decomposition(kernel, [s]).fields[s]


def kernel_from_fields(m: int, n: int, fields: Iterable[HaarCoefficientField], constant=0,
                       top: DyadicCube | None = None) -> PerfectKernel:
    """Kernel ``sum lambda_Q |I|^(2-m-n) a_I (x) b_J`` over explicit squares, plus ``constant`` on ``top``.

    ``top`` is an (m+n)-dimensional cube; it defaults to the unit cube.
    """
    fields = list(fields)
    d = m + n
    atoms = []
    finest = 0
    for f in fields:
        if f.has_tail:
            raise ValueError("fields with a coarse tail do not define a compact kernel")
        for Q, lam in f.coeffs.items():
            k, ix, jy = _key(Q)
            finest = max(finest, k + 1)
            atoms.append((f.signature.flags, k, ix, jy, lam))
    if top is None:
        top = DyadicCube.from_indices(0, (0,) * d)
    R = max(finest, top.scale)
    ranges = []
    for flags, k, ix, jy, lam in atoms:
        w = 1 << (R - k)
        idx = [ix] * m + [jy] * n
        ranges.append([(i * w, (i + 1) * w) for i in idx])
    lo = [min([r[a][0] for r in ranges] + [top.intervals[a].cell_range(R)[0]]) for a in range(d)]
    hi = [max([r[a][1] for r in ranges] + [top.intervals[a].cell_range(R)[1]]) for a in range(d)]
    shape = [h - l for l, h in zip(lo, hi)]
    cvals = [Fraction(lam) * pow2(k * (d - 2)) for _, k, _, _, lam in atoms]
    den = math.lcm(*[c.denominator for c in cvals], Fraction(constant).denominator)
    arr = np.zeros(shape, dtype=object)
    for (flags, k, ix, jy, lam), rng, c in zip(atoms, ranges, cvals):
        w = 1 << (R - k)
        piece = np.array([int(c * den)], dtype=object).reshape((1,) * d)
        for a, flag in enumerate(flags):
            vec = np.ones(w, dtype=object)
            if flag:
                vec[w // 2:] = -1
            piece = piece * vec.reshape([w if b == a else 1 for b in range(d)])
        sl = tuple(slice(r0 - l, r1 - l) for (r0, r1), l in zip(rng, lo))
        arr[sl] += piece
    if constant:
        c = Fraction(constant) * den
        sl = tuple(slice(a - l, b - l) for (a, b), l in zip((iv.cell_range(R) for iv in top.intervals), lo))
        arr[sl] += int(c)
    return PerfectKernel(m, n, StepFunction(R, lo, arr, den))


# brackets

def bracket_grid(g: BipartiteGraph, fs: Mapping[Edge, StepFunction], flags: Sequence[bool], k: int,
                 xr: tuple[int, int], yr: tuple[int, int]) -> tuple[np.ndarray, int]:
    """``A_Q`` for every square at scale ``k`` with x-index in ``xr`` and y-index in ``yr``.

    Returns integer numerators of shape ``(len(xr), len(yr))`` and a common denominator.
    """
    m = g.m
    R = max([k + 1] + [f.scale for f in fs.values()])
    W = 1 << (R - k)
    nI, nJ = xr[1] - xr[0], yr[1] - yr[0]
    if nI <= 0 or nJ <= 0:
        return np.zeros((max(nI, 0), max(nJ, 0)), dtype=np.int64), 1
    ops, den = [], 1
    for (i, j) in g.sorted_edges():
        f = fs[(i, j)].refine(R)
        arr = f.window_array(((xr[0] * W, xr[1] * W), (yr[0] * W, yr[1] * W)))
        ops.append((arr.reshape(nI, W, nJ, W), ("I", f"x{i}", "J", f"y{j}")))
        den *= f.den
    haar = np.concatenate([np.ones(W // 2, dtype=np.int64), -np.ones(W // 2, dtype=np.int64)])
    for a, flag in enumerate(flags):
        if flag:
            lab = f"x{a + 1}" if a < m else f"y{a - m + 1}"
            ops.append((haar, (lab,)))
    num = K_.product_sum(ops, ["I", "J"])
    return num, den * W ** (g.m + g.n)


def paraproduct_term(g: BipartiteGraph, fs: Mapping[Edge, StepFunction], s: Signature | Sequence[bool],
                     Q: DyadicCube) -> Fraction:
    """The bracket ``A_Q``: Haar pairings on the signature's axes, averages on the rest."""
    flags = s.flags if isinstance(s, Signature) else tuple(s)
    k, ix, jy = _key(Q)
    num, den = bracket_grid(g, fs, flags, k, (ix, ix + 1), (jy, jy + 1))
    return Fraction(int(num[0, 0]), den)


def _input_ranges(g: BipartiteGraph, fs: Mapping[Edge, StepFunction]) -> tuple[tuple[int, int], tuple[int, int], int] | None:
    """Cell ranges (x, y) where the product of the inputs can be nonzero, at their common scale."""
    R = max(f.scale for f in fs.values())
    xl = yl = -(1 << 62)
    xh = yh = 1 << 62
    # the product needs every input nonzero; each axis range is the intersection
    per_axis: dict[str, tuple[int, int]] = {}
    for (i, j), f in fs.items():
        box = f.refine(R).support_box()
        if box is None:
            return None
        for lab, (lo, hi) in ((f"x{i}", box[0]), (f"y{j}", box[1])):
            if lab in per_axis:
                lo, hi = max(lo, per_axis[lab][0]), min(hi, per_axis[lab][1])
            per_axis[lab] = (lo, hi)
    if any(hi <= lo for lo, hi in per_axis.values()):
        return None
    xs = [v for a, v in per_axis.items() if a[0] == "x"]
    ys = [v for a, v in per_axis.items() if a[0] == "y"]
    xl, xh = min(lo for lo, _ in xs), max(hi for _, hi in xs)
    yl, yh = min(lo for lo, _ in ys), max(hi for _, hi in ys)
    return (xl, xh), (yl, yh), R


def _block_range(cells: tuple[int, int], R: int, k: int) -> tuple[int, int]:
    if k >= R:
        w = 1 << (k - R)
        return cells[0] * w, cells[1] * w
    w = 1 << (R - k)
    return cells[0] // w, -((-cells[1]) // w)


def brackets(g: BipartiteGraph, fs: Mapping[Edge, StepFunction], flags: Sequence[bool],
             squares: Iterable[DyadicCube]) -> dict[DyadicCube, Fraction]:
    """``A_Q`` for many squares, one vectorized bracket per scale."""
    rng = _input_ranges(g, fs)
    by_scale: dict[int, list[DyadicCube]] = defaultdict(list)
    for Q in squares:
        by_scale[Q.scale].append(Q)
    out: dict[DyadicCube, Fraction] = {}
    for k, qs in by_scale.items():
        if rng is None:
            out.update({Q: Fraction(0) for Q in qs})
            continue
        xr_in = _block_range(rng[0], rng[2], k)
        yr_in = _block_range(rng[1], rng[2], k)
        ixs = [_key(Q)[1] for Q in qs]
        jys = [_key(Q)[2] for Q in qs]
        xr = (max(min(ixs), xr_in[0]), min(max(ixs) + 1, xr_in[1]))
        yr = (max(min(jys), yr_in[0]), min(max(jys) + 1, yr_in[1]))
        if xr[1] <= xr[0] or yr[1] <= yr[0]:
            out.update({Q: Fraction(0) for Q in qs})
            continue
        num, den = bracket_grid(g, fs, flags, k, xr, yr)
        for Q, ix, jy in zip(qs, ixs, jys):
            if xr[0] <= ix < xr[1] and yr[0] <= jy < yr[1]:
                out[Q] = Fraction(int(num[ix - xr[0], jy - yr[0]]), den)
            else:
                out[Q] = Fraction(0)
    return out


def evaluate_paraproduct(fld: HaarCoefficientField, g: BipartiteGraph, fs: Mapping[Edge, StepFunction]) -> Fraction:
    """``sum_Q lambda_Q |Q| A_Q`` over every square, the coarse tail summed in closed form."""
    if (fld.m, fld.n) != (g.m, g.n):
        raise DimensionMismatch("field and graph dimensions differ")
    flags = fld.signature.flags
    rng = _input_ranges(g, fs)
    if rng is None:
        return Fraction(0)
    total = Fraction(0)
    terms = dict(fld.coeffs)
    if fld.has_tail:
        kc = fld.coarse_scale
        xr, yr, R = rng
        k1 = min(kc, covering_scale((xr, yr), R))
        for k in range(k1, kc):
            for q in fld.coarse_mass:
                terms[_sq(k, *q)] = fld.tail_coefficient(k, q)
        d = g.m + g.n
        unit = brackets(g, fs, (False,) * d, [_sq(k1 - 1, *q) for q in fld.coarse_mass])
        for q, M in fld.coarse_mass.items():
            G = unit[_sq(k1 - 1, *q)] * pow2(-(k1 - 1) * d)
            total += M * G * pow2(k1 * d) / ((1 << d) - 1)
    A = brackets(g, fs, flags, terms)
    for Q, lam in terms.items():
        total += lam * Q.measure * A[Q]
    return total


@dataclass
class ReconstructionReport:
    ok: bool
    residual: Fraction
    form: Fraction
    by_signature: dict[Signature, Fraction]


def reconstruct_check(kernel: PerfectKernel, g: BipartiteGraph, fs: Mapping[Edge, StepFunction],
                      decomposition: Decomposition | None = None) -> ReconstructionReport:
    """Compare the form with the sum of all paraproducts of the kernel's Haar decomposition."""
    from .form import evaluate_form

    dec = decomposition or haar_decomposition(kernel)
    parts = {s: evaluate_paraproduct(f, g, fs) for s, f in dec.fields.items()}
    value = evaluate_form(kernel, g, fs)
    residual = abs(sum(parts.values(), Fraction(0)) - value)
    return ReconstructionReport(residual == 0, residual, value, parts)


# coefficient norms

def coeff_linf(fld: HaarCoefficientField) -> Fraction:
    best = max((abs(v) for v in fld.coeffs.values()), default=Fraction(0))
    if fld.has_tail:
        best = max([best] + [abs(M) * pow2(2 * (fld.coarse_scale - 1)) for M in fld.coarse_mass.values()])
    return best


def combined_bmo_squared(fields: Sequence[HaarCoefficientField]) -> tuple[Fraction, DyadicCube | None]:
    """``sup_Q0 |Q0|^-1 sum_{Q in Q0} |Q| sum_f |lambda^f_Q|^2`` with a maximizing square.

    Candidates are the support squares and their ancestors down to a scale
    ``k_low`` below which only the four origin squares carry anything; there
    the value is a concave quadratic in ``4^k`` and is maximized exactly.
    """
    explicit: dict[DyadicCube, Fraction] = defaultdict(Fraction)
    tails = [f for f in fields if f.has_tail]
    scales = [Q.scale for f in fields for Q in f.coeffs] + [f.coarse_scale for f in tails]
    if not scales:
        return Fraction(0), None
    k_low = min(scales)
    for f in fields:
        for Q, v in f.coeffs.items():
            explicit[Q] += Q.measure * v * v
    reach = max([max(-iv.left, iv.right) for Q in explicit for iv in Q.intervals] + [Fraction(0)])
    while pow2(-k_low) < reach:
        k_low -= 1
    for f in tails:
        for k in range(k_low, f.coarse_scale):
            for q in f.coarse_mass:
                Q = _sq(k, *q)
                explicit[Q] += Q.measure * f.tail_coefficient(k, q) ** 2
    # ancestors down to k_low
    acc: dict[DyadicCube, Fraction] = defaultdict(Fraction)
    for Q, w in explicit.items():
        if w == 0:
            continue
        P = Q
        while True:
            acc[P] += w
            if P.scale == k_low:
                break
            P = P.parent()
    best, arg = Fraction(0), None
    for Q, w in acc.items():
        val = w / Q.measure
        if val > best or (val == best and arg is not None and _key(Q) < _key(arg)):
            best, arg = val, Q
    # closed-form chain below k_low in each quadrant
    for q in QUADRANTS:
        M2 = sum((f.coarse_mass.get(q, Fraction(0)) ** 2 for f in tails), Fraction(0))
        E = acc.get(_sq(k_low, *q), Fraction(0))
        if M2 == 0 and E == 0:
            continue
        A = E + M2 * pow2(2 * k_low) / 3
        cands = {k_low - 1}
        if M2 != 0:
            ustar = 3 * A / (2 * M2)
            k = k_low - 1
            while pow2(2 * k) > ustar:
                k -= 1
            cands |= {k, k + 1}
        for k in cands:
            if k >= k_low:
                continue
            u = pow2(2 * k)
            val = u * A - M2 * u * u / 3
            if val > best:
                best, arg = val, _sq(k, *q)
    return best, arg


def coeff_norms(fld: HaarCoefficientField) -> tuple[Fraction, Fraction]:
    """``(sup |lambda_Q|, bmo norm squared)`` of one field."""
    return coeff_linf(fld), combined_bmo_squared([fld])[0]


# trees

@dataclass(frozen=True)
class ConvexTree:
    squares: frozenset[DyadicCube]
    top: DyadicCube

    def __post_init__(self):
        object.__setattr__(self, "squares", frozenset(self.squares))
        for Q in self.squares:
            if not self.top.contains(Q):
                raise ValueError(f"{Q} is not inside the tree top")
        for Q in self.squares:
            # every square between a member and the top-most member above it must belong
            chain, P = [], Q
            while P.scale > self.top.scale:
                P = P.parent()
                chain.append(P)
            inside = [k for k, P in enumerate(chain) if P in self.squares]
            if inside:
                for P in chain[: max(inside)]:
                    if P not in self.squares:
                        raise ValueError("tree is not convex")

    @classmethod
    def full(cls, top: DyadicCube, depth: int) -> ConvexTree:
        """All squares inside ``top`` of scales ``top.scale .. top.scale + depth - 1``."""
        members, layer = [], [top]
        for _ in range(depth):
            members.extend(layer)
            layer = [c for Q in layer for c in Q.children()]
        return cls(frozenset(members), top)

    @property
    def depth(self) -> int:
        return max(Q.scale for Q in self.squares) - self.top.scale + 1 if self.squares else 0


def tree_leaves(tree: ConvexTree) -> set[DyadicCube]:
    return {c for Q in tree.squares for c in Q.children() if c not in tree.squares}


def localized_theta(fld: HaarCoefficientField, g: BipartiteGraph, fs: Mapping[Edge, StepFunction],
                    tree: ConvexTree) -> Fraction:
    """``sum_{Q in T} |lambda_Q| |Q| |A_Q|``."""
    lams = {Q: fld.coefficient(Q) for Q in tree.squares}
    live = [Q for Q, v in lams.items() if v != 0]
    A = brackets(g, fs, fld.signature.flags, live)
    return sum((abs(lams[Q]) * Q.measure * abs(A[Q]) for Q in live), Fraction(0))


def _iroot(a: int, k: int) -> int:
    """``floor(a ** (1/k))`` for a nonnegative integer."""
    if a < 2:
        return a
    x = 1 << -(-a.bit_length() // k)
    while True:
        y = ((k - 1) * x + a // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > a:
        x -= 1
    while (x + 1) ** k <= a:
        x += 1
    return x


def root_interval(q: Fraction, k: int, rel_bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational enclosure ``lo <= q^(1/k) <= hi`` with ``hi - lo <= 2^-rel_bits * lo``."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("root of a negative number")
    if q == 0:
        return Fraction(0), Fraction(0)
    mag = (q.numerator.bit_length() - q.denominator.bit_length()) // k
    P = rel_bits + 2 - min(mag, 0) + 1
    scaled = q * (1 << (k * P))
    r = _iroot(scaled.numerator // scaled.denominator, k)
    lo = Fraction(r, 1 << P)
    if lo ** k == q:
        return lo, lo
    return lo, Fraction(r + 1, 1 << P)


def power_mean(f: StepFunction, Q: DyadicCube, d: int) -> Fraction:
    """``[f^d]_Q``, the average of ``f^d`` over ``Q``."""
    return f.power(d).average({0: Q.intervals[0], 1: Q.intervals[1]})


@dataclass
class TreeRatio:
    theta: Fraction
    lo: Fraction
    hi: Fraction


def single_tree_ratio(fld: HaarCoefficientField, g: BipartiteGraph, fs: Mapping[Edge, StepFunction],
                      tree: ConvexTree, d: Mapping[Edge, int]) -> TreeRatio:
    """Enclosure of ``Theta_T / (|Q_T| prod_e max_{Q in T or leaves} [F_e^d_e]_Q^(1/d_e))``."""
    theta = localized_theta(fld, g, fs, tree)
    region = list(tree.squares | tree_leaves(tree))
    lo_den, hi_den = tree.top.measure, tree.top.measure
    for e in g.sorted_edges():
        best = max(power_mean(fs[e], Q, d[e]) for Q in region)
        if best == 0:
            raise ZeroDenominator(f"input on edge {e} vanishes on the tree")
        a, b = root_interval(best, d[e])
        lo_den *= a
        hi_den *= b
    if theta == 0:
        return TreeRatio(theta, Fraction(0), Fraction(0))
    return TreeRatio(theta, theta / hi_den, theta / lo_den)
