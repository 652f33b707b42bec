"""Cyclic Jacobi eigenvalue solver for dense symmetric matrices."""
import math

import numpy as np
from numba import njit

from .exceptions import DimensionError, NumericalFailure

__all__ = ["jacobi_eigenvalues"]


@njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return math.sqrt(s)


@njit(cache=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        if _off_norm(a) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp = a[r, p]
                    arq = a[r, q]
                    a[r, p] = c * arp - s * arq
                    a[p, r] = a[r, p]
                    a[r, q] = s * arp + c * arq
                    a[q, r] = a[r, q]
    if _off_norm(a) <= tol:
        return max_sweeps
    return -1


def jacobi_eigenvalues(matrix, rel_tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix, ascending.

    Sweeps stop once the Frobenius norm of the off-diagonal part falls
    below ``rel_tol`` times the Frobenius norm of the input.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return np.empty(0)
    if not np.all(np.isfinite(a)):
        raise NumericalFailure("matrix has non-finite entries")
    a = 0.5 * (a + a.T)
    tol = rel_tol * float(np.linalg.norm(a))
    if _jacobi_sweeps(a, tol, max_sweeps) < 0:
        raise NumericalFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a).copy())
