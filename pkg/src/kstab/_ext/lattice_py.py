"""Pure-Python twin of ``_lattice.pyx`` with identical semantics."""

import itertools


def lattice_sums(lo, hi, normals, rhs, grads, consts, shift):
    count = s1 = s2 = 0
    planes = list(zip(normals, rhs))
    pieces = list(zip(grads, consts))
    for u in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(sum(c * x for c, x in zip(nrm, u)) >= r for nrm, r in planes):
            w = shift - max(sum(g * x for g, x in zip(grad, u)) + c for grad, c in pieces)
            count += 1
            s1 += w
            s2 += w * w
    return count, s1, s2
