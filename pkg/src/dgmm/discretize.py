"""Second-order difference operators and trapezoid weights.

Operators are returned as sparse CSR matrices so that adjoints (used by
energy gradients) are plain transposes. Periodic operators wrap; the
non-periodic ones use second-order one-sided stencils at the ends.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=64)
def d1_matrix(n: int, h: float, periodic: bool) -> sp.csr_matrix:
    """First derivative, central interior stencil."""
    if periodic:
        D = sp.diags([-1.0, 1.0], [-1, 1], shape=(n, n), format="lil")
        D[0, n - 1] = -1.0
        D[n - 1, 0] = 1.0
        return (D / (2.0 * h)).tocsr()
    D = sp.diags([-1.0, 1.0], [-1, 1], shape=(n, n), format="lil")
    D[0, :3] = [-3.0, 4.0, -1.0]
    D[n - 1, n - 3:] = [1.0, -4.0, 3.0]
    return (D / (2.0 * h)).tocsr()


@lru_cache(maxsize=64)
def d2_matrix(n: int, h: float, periodic: bool) -> sp.csr_matrix:
    """Second derivative, central interior stencil."""
    if periodic:
        D = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="lil")
        D[0, n - 1] = 1.0
        D[n - 1, 0] = 1.0
        return (D / h**2).tocsr()
    D = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="lil")
    D[0, :4] = [2.0, -5.0, 4.0, -1.0]
    D[n - 1, n - 4:] = [-1.0, 4.0, -5.0, 2.0]
    return (D / h**2).tocsr()


def trapezoid_weights(n: int, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return np.full(n, h)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@lru_cache(maxsize=32)
def identity(n: int) -> sp.csr_matrix:
    return sp.identity(n, format="csr")
