"""Exact integer array kernels.

Every value in the package is an integer array paired with a common
denominator, so the hot loops are integer multiply-adds. ``int64`` is used
whenever a cheap magnitude bound proves the result cannot overflow; otherwise
arrays are promoted to ``object`` (Python ints) and the numpy path runs.

The generic multi-operand product-sum has two implementations selected by
:mod:`._backend`: a numba kernel iterating strided operands, and
``numpy.einsum``.
"""

from __future__ import annotations

import math
import string
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import _backend

INT_LIMIT = 1 << 62
# below this many multiply-adds the dispatch overhead outweighs the compiled loop
NUMBA_MIN_WORK = 1 << 15

if _backend.HAVE_NUMBA:
    from numba import njit, prange

    @njit(cache=True)
    def _fill_rows(data, strides, shape, vary, fixed, out, start, stop):  # pragma: no cover - compiled
        """Rows ``start..stop`` of the leading axes: each the sum over the last axis of the operand product."""
        nf = len(data)
        tail = shape.shape[0] - 1
        last = shape[tail]
        nv = vary.shape[0]
        pos = np.zeros(nf, dtype=np.int64)
        idx = np.zeros(tail + 1, dtype=np.int64)
        rem = start
        for a in range(tail - 1, -1, -1):
            idx[a] = rem % shape[a]
            rem = rem // shape[a]
            for f in range(nf):
                pos[f] += idx[a] * strides[f, a]
        for r in range(start, stop):
            c = 1
            for t in range(fixed.shape[0]):
                c *= data[fixed[t]][pos[fixed[t]]]
            acc = 0
            if c != 0:
                if nv == 1:
                    a0 = data[vary[0]]
                    p0 = pos[vary[0]]
                    s0 = strides[vary[0], tail]
                    for j in range(last):
                        acc += a0[p0 + j * s0]
                elif nv == 2:
                    a0 = data[vary[0]]
                    a1 = data[vary[1]]
                    p0 = pos[vary[0]]
                    p1 = pos[vary[1]]
                    s0 = strides[vary[0], tail]
                    s1 = strides[vary[1], tail]
                    for j in range(last):
                        acc += a0[p0 + j * s0] * a1[p1 + j * s1]
                else:
                    for j in range(last):
                        prod = 1
                        for t in range(nv):
                            prod *= data[vary[t]][pos[vary[t]] + j * strides[vary[t], tail]]
                        acc += prod
            out[r] = c * acc
            # odometer over the leading axes
            a = tail - 1
            while a >= 0:
                idx[a] += 1
                if idx[a] < shape[a]:
                    for f in range(nf):
                        pos[f] += strides[f, a]
                    break
                for f in range(nf):
                    pos[f] -= strides[f, a] * (shape[a] - 1)
                idx[a] = 0
                a -= 1

    @njit(cache=True, parallel=True)
    def _strided_rows(data, strides, shape, vary, fixed, chunk):  # pragma: no cover - compiled
        """Per index of every axis but the last, the sum over the last axis of the operand product.

        ``data`` is a tuple of flat operand arrays. Operands in ``fixed`` do
        not carry the last axis; their product is taken once per row and a
        zero skips the row. Chunks of rows run in parallel. The parallel body
        is a single call on purpose: numba's parfor pass mistreats in-place
        accumulators written directly inside it.
        """
        nrows = 1
        for a in range(shape.shape[0] - 1):
            nrows *= shape[a]
        out = np.zeros(nrows, dtype=np.int64)
        nchunks = (nrows + chunk - 1) // chunk
        for q in prange(nchunks):
            _fill_rows(data, strides, shape, vary, fixed, out, q * chunk, min(nrows, (q + 1) * chunk))
        return out


def max_abs(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    return int(max(abs(int(arr.max())), abs(int(arr.min()))))


def exact(arr) -> np.ndarray:
    """Integer array as ``int64`` when it fits safely, else ``object``."""
    arr = np.asarray(arr)
    if arr.dtype == np.int64:
        return arr
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64)
    if arr.dtype == object:
        if arr.size == 0 or max_abs(arr) < INT_LIMIT:
            return arr.astype(np.int64)
        return arr
    raise TypeError(f"expected an integer array, got dtype {arr.dtype}")


def as_object(arr: np.ndarray) -> np.ndarray:
    return arr if arr.dtype == object else arr.astype(object)


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and max_abs(a) * max_abs(b) < INT_LIMIT:
        return a * b
    return exact(as_object(a) * as_object(b))


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and max_abs(a) + max_abs(b) < INT_LIMIT:
        return a + b
    return exact(as_object(a) + as_object(b))


def scale(a: np.ndarray, c: int) -> np.ndarray:
    c = int(c)
    if c == 1:
        return a
    if a.dtype == np.int64 and max_abs(a) * abs(c) < INT_LIMIT:
        return a * c
    return exact(as_object(a) * c)


def total(a: np.ndarray, axis=None) -> np.ndarray | int:
    """Exact sum; promotes to Python ints when the bound could overflow."""
    count = a.size if axis is None else math.prod(a.shape[ax] for ax in np.atleast_1d(axis))
    if a.dtype == np.int64 and max_abs(a) * max(count, 1) >= INT_LIMIT:
        a = as_object(a)
    s = a.sum(axis=axis)
    if axis is None:
        return int(s)
    return exact(s)


def block_pair(arr: np.ndarray, axis: int, width: int, haar: bool) -> np.ndarray:
    """Pair ``arr`` along ``axis`` with each aligned block of ``width`` cells.

    Returns per block the plain sum (``haar=False``) or left-half sum minus
    right-half sum (``haar=True``). ``width`` must divide the axis length and
    be even when ``haar`` is set.
    """
    n = arr.shape[axis]
    if n % width:
        raise ValueError("axis length must be a multiple of the block width")
    if haar and width % 2:
        raise ValueError("Haar pairing needs an even block width")
    shape = arr.shape[:axis] + (n // width, 2, width // 2) + arr.shape[axis + 1:]
    halves = total(arr.reshape(shape), axis=axis + 2)
    left = np.take(halves, 0, axis=axis + 1)
    right = np.take(halves, 1, axis=axis + 1)
    if haar:
        return add(left, scale(right, -1))
    return add(left, right)


def product_sum(
    operands: Sequence[tuple[np.ndarray, Sequence[Hashable]]],
    out_axes: Sequence[Hashable],
    sizes: Mapping[Hashable, int] | None = None,
) -> np.ndarray:
    """Sum over all non-output axes of the product of labelled operands.

    Each operand is ``(array, labels)`` with one label per array axis. The
    result has one axis per entry of ``out_axes``, in that order; ``sizes``
    is only needed for output axes that no operand carries.
    """
    dims: dict[Hashable, int] = dict(sizes or {})
    for arr, labels in operands:
        if arr.ndim != len(labels):
            raise ValueError("operand rank does not match its labels")
        if len(set(labels)) != len(labels):
            raise ValueError("repeated label within one operand")
        for size, lab in zip(arr.shape, labels):
            if dims.setdefault(lab, size) != size:
                raise ValueError(f"inconsistent size for axis {lab!r}")
    out_axes = list(out_axes)
    for lab in out_axes:
        if lab not in dims:
            raise ValueError(f"no size known for output axis {lab!r}")
    carried = {lab for _, labels in operands for lab in labels}
    # summed axes are the carried ones; ``sizes`` only sizes broadcast outputs
    summed = [lab for lab in dims if lab in carried and lab not in out_axes]
    dims = {lab: dims[lab] for lab in out_axes + summed}
    out_shape = tuple(dims[lab] for lab in out_axes)
    if not operands:
        return np.ones(out_shape, dtype=np.int64)

    inner = math.prod(dims[lab] for lab in summed)
    bound = math.prod(max_abs(arr) for arr, _ in operands) * max(inner, 1)
    small = bound < INT_LIMIT and all(arr.dtype == np.int64 for arr, _ in operands)
    work = math.prod(out_shape) * inner
    if small and summed and work >= NUMBA_MIN_WORK and _backend.get_backend() == "numba":
        return _numba_product_sum(operands, out_axes, summed, dims)
    return _einsum_product_sum(operands, out_axes, dims, small)


def _einsum_product_sum(operands, out_axes, dims, small):
    letters = {lab: string.ascii_letters[i] for i, lab in enumerate(dims)}
    arrays = [arr if small else as_object(arr) for arr, _ in operands]
    subs = ",".join("".join(letters[lab] for lab in labels) for _, labels in operands)
    missing = [lab for lab in dims if all(lab not in labels for _, labels in operands)]
    for lab in missing:
        # axis no operand carries: broadcast, or count it when summed
        arrays.append(np.ones(dims[lab], dtype=np.int64 if small else object))
        subs += "," + letters[lab]
    expr = subs + "->" + "".join(letters[lab] for lab in out_axes)
    res = np.einsum(expr, *arrays)
    if small:
        return np.asarray(res, dtype=np.int64)
    return exact(np.asarray(res, dtype=object))


def _numba_product_sum(operands, out_axes, summed, dims):
    # the tight loop runs over the summed axis carried by the fewest operands
    def cost(lab):
        # fewest carriers first, then the smallest memory strides
        carried = [(arr, labels) for arr, labels in operands if lab in labels]
        stride = sum(math.prod(arr.shape[labels.index(lab) + 1:]) for arr, labels in carried)
        return len(carried), stride, -dims[lab]

    operands = [(arr, tuple(labels)) for arr, labels in operands]
    tight = min(summed, key=cost)
    order = list(out_axes) + [lab for lab in summed if lab != tight] + [tight]
    pos = {lab: i for i, lab in enumerate(order)}
    shape = np.array([dims[lab] for lab in order], dtype=np.int64)
    chunks = []
    strides = np.zeros((len(operands), len(order)), dtype=np.int64)
    for f, (arr, labels) in enumerate(operands):
        flat = np.ascontiguousarray(arr, dtype=np.int64).ravel().view()
        # one array type for the whole tuple: mark every view read-only
        flat.flags.writeable = False
        chunks.append(flat)
        step = 1
        for lab, size in zip(reversed(labels), reversed(arr.shape)):
            strides[f, pos[lab]] = step
            step *= size
    out_shape = tuple(int(v) for v in shape[: len(out_axes)])
    if 0 in shape:
        return np.zeros(out_shape, dtype=np.int64)
    vary = np.array([f for f, (_, labels) in enumerate(operands) if tight in labels], dtype=np.int64)
    fixed = np.array([f for f, (_, labels) in enumerate(operands) if tight not in labels], dtype=np.int64)
    n_rows = math.prod(int(v) for v in shape[:-1])
    chunk = max(64, -(-n_rows // (8 * _backend.thread_count())))
    rows = _strided_rows(tuple(chunks), strides, shape, vary, fixed, chunk)
    rows = rows.reshape(out_shape + tuple(int(v) for v in shape[len(out_axes):-1]))
    return rows.sum(axis=tuple(range(len(out_axes), rows.ndim))) if rows.ndim > len(out_axes) else rows
