import pytest
from hypothesis import given
from hypothesis import strategies as st

from kstab import kernels
from kstab._ext import lattice_py

needs_cython = pytest.mark.skipif("cython" not in kernels.available_backends(),
                                  reason="compiled extension not built")

ints = st.integers(-6, 6)


@st.composite
def kernel_inputs(draw):
    n = draw(st.integers(1, 3))
    lo = [draw(st.integers(-4, 0)) for _ in range(n)]
    hi = [a + draw(st.integers(0, 5)) for a in lo]
    m = draw(st.integers(0, 3))
    normals = [[draw(ints) for _ in range(n)] for _ in range(m)]
    rhs = [draw(st.integers(-10, 10)) for _ in range(m)]
    p = draw(st.integers(1, 3))
    grads = [[draw(ints) for _ in range(n)] for _ in range(p)]
    consts = [draw(st.integers(-20, 20)) for _ in range(p)]
    shift = draw(st.integers(-50, 50))
    return lo, hi, normals, rhs, grads, consts, shift


@needs_cython
@given(kernel_inputs())
def test_backends_agree(args):
    with kernels.use_backend("cython"):
        fast = kernels.lattice_sums(*args)
    assert fast == lattice_py.lattice_sums(*args)


def test_python_backend_by_hand():
    # points 0..3 with u >= 1, w = 10 - max(u, 2)
    assert lattice_py.lattice_sums([0], [3], [[1]], [1], [[1], [0]], [0, 2], 10) == (3, 8 + 8 + 7, 64 + 64 + 49)


@needs_cython
def test_overflow_guard_falls_back():
    big = 2**70
    args = ([0], [2], [], [], [[1]], [0], big)
    assert not kernels._fits_int64(*args)
    with kernels.use_backend("cython"):
        out = kernels.lattice_sums(*args)
    assert out == (3, 3 * big - 3, sum((big - u) ** 2 for u in range(3)))


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        with kernels.use_backend("fortran"):
            pass
