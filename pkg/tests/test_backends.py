import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entangled_t1 import get_backend, set_backend
from entangled_t1._backend import HAVE_NUMBA
from entangled_t1 import _kernels as K
from entangled_t1.form import evaluate_adjoint, evaluate_form
from entangled_t1.generators import random_inputs, random_perfect_kernel
from entangled_t1.graph import box_graph, cup_graph

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def restore_backend():
    prev = get_backend()
    yield
    set_backend(prev)


@st.composite
def contractions(draw):
    labs = list("abcde")[: draw(st.integers(1, 5))]
    dims = {lab: draw(st.integers(1, 5)) for lab in labs}
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    ops = []
    for _ in range(draw(st.integers(1, 4))):
        k = draw(st.integers(1, len(labs)))
        ls = tuple(rng.permutation(labs)[:k])
        ops.append((rng.integers(-3, 4, size=[dims[x] for x in ls]), ls))
    carried = {x for _, ls in ops for x in ls}
    out = [x for x in labs if draw(st.booleans()) and x in carried]
    summed = [x for x in labs if x in carried and x not in out]
    return ops, out, summed, {x: dims[x] for x in out + summed}


@needs_numba
@given(contractions())
def test_compiled_kernel_matches_einsum(case):
    ops, out, summed, dims = case
    if not summed:
        return
    assert np.array_equal(K._numba_product_sum(ops, out, summed, dims),
                          K._einsum_product_sum(ops, out, dims, True))


@needs_numba
def test_large_case_dispatches_to_numba(restore_backend):
    rng = np.random.default_rng(0)
    a = rng.integers(-9, 10, size=(40, 40, 40))
    b = rng.integers(-9, 10, size=(40, 40))
    ops = [(a, ("i", "j", "k")), (b, ("j", "k"))]
    set_backend("numba")
    x = K.product_sum(ops, ["i"])
    set_backend("numpy")
    assert np.array_equal(x, K.product_sum(ops, ["i"]))


def test_overflow_promotes_to_python_ints(restore_backend):
    big = np.full((3, 3), 1 << 40, dtype=np.int64)
    for name in ("numpy", "numba") if HAVE_NUMBA else ("numpy",):
        set_backend(name)
        r = K.product_sum([(big, ("i", "j")), (big, ("j", "k"))], ["i", "k"])
        assert int(r[0, 0]) == 3 * (1 << 80)


@needs_numba
@pytest.mark.parametrize("g", [cup_graph(), box_graph()])
def test_backends_agree_on_forms(g, restore_backend):
    rng = random.Random(5)
    K4 = random_perfect_kernel(rng, resolution=4, per_signature=3)
    fs = random_inputs(rng, g, 4)
    vals = {}
    for name in ("numpy", "numba"):
        set_backend(name)
        vals[name] = (evaluate_form(K4, g, fs, plan="naive"), evaluate_form(K4, g, fs),
                      evaluate_adjoint(K4, g, (1, 1), fs).to_text())
    assert vals["numpy"] == vals["numba"]


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        set_backend("cuda")
