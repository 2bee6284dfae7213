"""Shared test data and random generators."""

from fractions import Fraction

from hypothesis import strategies as st

from kstab.exact import mat_mul, transpose
from kstab.invariants import synthetic_model


VERTICES = {
    "segment": [[0], [1]],
    "square": [[0, 0], [1, 0], [0, 1], [1, 1]],
    "cube": [[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)],
    "simplex2": [[0, 0], [1, 0], [0, 1]],
    "simplex3": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
    "trapezoid": [[0, 0], [2, 0], [1, 1], [0, 1]],
}

# (volume, lattice boundary measure), computed by hand
MEASURES = {
    "segment": (Fraction(1), Fraction(2)),
    "square": (Fraction(1), Fraction(4)),
    "cube": (Fraction(1), Fraction(6)),
    "simplex2": (Fraction(1, 2), Fraction(3)),
    "simplex3": (Fraction(1, 6), Fraction(2)),
    "trapezoid": (Fraction(3, 2), Fraction(5)),
}


def small_fractions(max_num=20, max_den=6):
    return st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))


def random_fraction(rng, max_num=9, max_den=5):
    return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))


def random_pd_gram(rng, m):
    """B^T B + I for a random small integer B: symmetric positive definite."""
    B = [[Fraction(rng.randint(-3, 3)) for _ in range(m)] for _ in range(m)]
    G = mat_mul(transpose(B), B)
    return [[G[i][j] + (1 if i == j else 0) for j in range(m)] for i in range(m)]


def random_synthetic_model(rng, m=None):
    m = m or rng.randint(1, 4)
    futaki = [random_fraction(rng) for _ in range(m)]
    if not any(futaki):
        futaki[0] = Fraction(1)
    gram = random_pd_gram(rng, m)
    b0 = [random_fraction(rng) for _ in range(m)]
    a0 = Fraction(rng.randint(1, 5), rng.randint(1, 3))
    a1 = random_fraction(rng)
    return synthetic_model(futaki, gram, b0=b0, a0=a0, a1=a1, n=rng.randint(1, 3)), futaki, gram
