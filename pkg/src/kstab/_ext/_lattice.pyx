# cython: language_level=3, boundscheck=False, wraparound=False
"""Lattice-point sums over a dilated polytope in int64 arithmetic.

Callers must guarantee that every weight and every partial sum of squared
weights fits in a signed 64-bit integer; kstab.kernels checks this bound
before dispatching here.
"""

from libc.stdlib cimport malloc, free

cdef enum:
    MAXDIM = 3


def lattice_sums(lo, hi, normals, rhs, grads, consts, long long shift):
    """Return (count, sum w, sum w^2) over integer u in the box [lo, hi]
    with normals . u >= rhs, where w(u) = shift - max_j(grads[j] . u + consts[j])."""
    cdef int n = len(lo)
    cdef int nf = len(normals)
    cdef int npc = len(grads)
    cdef long long l[MAXDIM]
    cdef long long h[MAXDIM]
    cdef long long u[MAXDIM]
    cdef long long *nrm = <long long *> malloc(max(nf, 1) * MAXDIM * sizeof(long long))
    cdef long long *r = <long long *> malloc(max(nf, 1) * sizeof(long long))
    cdef long long *g = <long long *> malloc(max(npc, 1) * MAXDIM * sizeof(long long))
    cdef long long *c = <long long *> malloc(max(npc, 1) * sizeof(long long))
    cdef int i, j, d, inside
    cdef long long acc, best, w
    cdef long long count = 0, s1 = 0, s2 = 0
    if n < 1 or n > MAXDIM:
        raise ValueError("dimension must be 1, 2 or 3")
    try:
        for d in range(MAXDIM):
            l[d] = lo[d] if d < n else 0
            h[d] = hi[d] if d < n else 0
        for i in range(nf):
            r[i] = rhs[i]
            for d in range(MAXDIM):
                nrm[i * MAXDIM + d] = normals[i][d] if d < n else 0
        for j in range(npc):
            c[j] = consts[j]
            for d in range(MAXDIM):
                g[j * MAXDIM + d] = grads[j][d] if d < n else 0
        u[0] = l[0]
        while u[0] <= h[0]:
            u[1] = l[1]
            while u[1] <= h[1]:
                u[2] = l[2]
                while u[2] <= h[2]:
                    inside = 1
                    for i in range(nf):
                        acc = nrm[i * MAXDIM] * u[0] + nrm[i * MAXDIM + 1] * u[1] + nrm[i * MAXDIM + 2] * u[2]
                        if acc < r[i]:
                            inside = 0
                            break
                    if inside:
                        best = g[0] * u[0] + g[1] * u[1] + g[2] * u[2] + c[0]
                        for j in range(1, npc):
                            acc = g[j * MAXDIM] * u[0] + g[j * MAXDIM + 1] * u[1] + g[j * MAXDIM + 2] * u[2] + c[j]
                            if acc > best:
                                best = acc
                        w = shift - best
                        count += 1
                        s1 += w
                        s2 += w * w
                    u[2] += 1
                u[1] += 1
            u[0] += 1
    finally:
        free(nrm)
        free(r)
        free(g)
        free(c)
    return count, s1, s2
