"""Dispatch for the lattice-sum kernel.

The compiled extension is used when it imported successfully and the int64
bound check passes; otherwise the pure-Python implementation runs on
unbounded integers.  Both return identical results.
"""

from __future__ import annotations

from contextlib import contextmanager

from ._ext import lattice_py

try:
    from ._ext import _lattice
except ImportError:  # extension not built
    _lattice = None

INT64_LIMIT = 2**62
BACKEND = "cython" if _lattice is not None else "python"
_forced: str | None = None


def available_backends() -> list[str]:
    return ["cython", "python"] if _lattice is not None else ["python"]


@contextmanager
def use_backend(name: str):
    """Temporarily force ``"python"`` or ``"cython"``."""
    global _forced
    if name not in available_backends():
        raise ValueError(f"backend {name!r} is not available")
    prev, _forced = _forced, name
    try:
        yield
    finally:
        _forced = prev


def _fits_int64(lo, hi, normals, rhs, grads, consts, shift) -> bool:
    coord = max(max(abs(a), abs(b)) for a, b in zip(lo, hi))
    npts = 1
    for a, b in zip(lo, hi):
        npts *= b - a + 1
    plane = max((sum(abs(c) for c in nrm) * coord + abs(r) for nrm, r in zip(normals, rhs)), default=0)
    piece = max(sum(abs(g) for g in grad) * coord + abs(c) for grad, c in zip(grads, consts))
    w = abs(shift) + piece
    return plane < INT64_LIMIT and w < INT64_LIMIT and npts * w * w < INT64_LIMIT


def lattice_sums(lo, hi, normals, rhs, grads, consts, shift) -> tuple[int, int, int]:
    """``(count, sum w, sum w^2)`` over integer points ``u`` of the box ``[lo, hi]``
    satisfying ``normals . u >= rhs``, with ``w(u) = shift - max_j(grads_j . u + consts_j)``.
    All inputs are Python ints."""
    backend = _forced or BACKEND
    if backend == "cython" and _fits_int64(lo, hi, normals, rhs, grads, consts, shift):
        return _lattice.lattice_sums(lo, hi, normals, rhs, grads, consts, shift)
    return lattice_py.lattice_sums(lo, hi, normals, rhs, grads, consts, shift)
