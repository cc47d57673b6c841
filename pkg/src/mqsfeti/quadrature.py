"""Collapsed-coordinate (conical product) quadrature on simplices.

Rules are returned as barycentric points and weights normalised to sum to
one, so ``measure * sum(w * f(x))`` integrates ``f`` over the simplex.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


def _jacobi01(n, alpha):
    """Gauss-Jacobi nodes/weights on [0, 1] for the weight (1 - t)**alpha."""
    x, w = roots_jacobi(n, alpha, 0.0)
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1)


@lru_cache(maxsize=None)
def tet_rule(degree: int):
    """Rule exact for polynomials of total degree ``degree`` on a tetrahedron."""
    n = max(1, (degree + 2) // 2)
    a, wa = _jacobi01(n, 2.0)
    b, wb = _jacobi01(n, 1.0)
    c, wc = _jacobi01(n, 0.0)
    A, B, Cc = np.meshgrid(a, b, c, indexing="ij")
    W = np.einsum("i,j,k->ijk", wa, wb, wc).ravel()
    x1 = A.ravel()
    x2 = (B * (1 - A)).ravel()
    x3 = (Cc * (1 - A) * (1 - B)).ravel()
    bary = np.column_stack([1 - x1 - x2 - x3, x1, x2, x3])
    W = W / W.sum()
    bary.setflags(write=False)
    W.setflags(write=False)
    return bary, W


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Rule exact for polynomials of total degree ``degree`` on a triangle."""
    n = max(1, (degree + 2) // 2)
    a, wa = _jacobi01(n, 1.0)
    b, wb = _jacobi01(n, 0.0)
    A, B = np.meshgrid(a, b, indexing="ij")
    W = np.outer(wa, wb).ravel()
    x1 = A.ravel()
    x2 = (B * (1 - A)).ravel()
    bary = np.column_stack([1 - x1 - x2, x1, x2])
    W = W / W.sum()
    bary.setflags(write=False)
    W.setflags(write=False)
    return bary, W
