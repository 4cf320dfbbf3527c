"""Dense linear algebra kernels for small real matrices.

Everything here targets desk-scale problems (matrices up to a few tens of
rows): LU factorization with partial pivoting for the implicit solves, and
a cyclic Jacobi iteration for symmetric eigenvalues. No sparse or
iterative machinery.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, SingularMatrixError

# Pivot cutoff relative to the largest entry of the input matrix.
PIVOT_RTOL = 1e-13

_TINY = np.finfo(float).tiny


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def lu_factor(a, rtol: float = PIVOT_RTOL):
    """Factor ``a`` as P·A = L·U with partial pivoting.

    Returns ``(lu, perm)`` where ``lu`` packs the unit-lower and upper
    triangles and ``perm`` is the row permutation. Raises
    :class:`SingularMatrixError` with the offending pivot magnitude when a
    pivot falls at or below ``rtol``-scaled the largest entry of ``a``.
    """
    lu = np.array(_as_square(a), dtype=float)
    n = lu.shape[0]
    threshold = rtol * max(float(np.max(np.abs(lu))) if n else 0.0, _TINY)
    perm = np.arange(n)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(lu[k:, k])))
        pivot = abs(lu[piv, k])
        if pivot <= threshold:
            raise SingularMatrixError(pivot, threshold)
        if piv != k:
            lu[[k, piv]] = lu[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
        lu[k + 1 :, k] /= lu[k, k]
        lu[k + 1 :, k + 1 :] -= lu[k + 1 :, k, None] * lu[k, k + 1 :]
    return lu, perm


def lu_solve(factorization, b) -> np.ndarray:
    """Solve A·x = b given ``lu_factor`` output; ``b`` may be a vector or matrix."""
    lu, perm = factorization
    n = lu.shape[0]
    b = np.asarray(b, dtype=float)
    if b.shape[0] != n:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, matrix has {n}")
    x = b[perm].astype(float, copy=True)
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] -= lu[k, k + 1 :] @ x[k + 1 :]
        x[k] /= lu[k, k]
    return x


def solve(a, b, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Solve the dense system A·x = b by LU with partial pivoting.

    Parameters
    ----------
    a : (n, n) array_like
        Square, nonsingular within the pivot threshold.
    b : (n,) or (n, m) array_like
        One right-hand side, or one per column.

    Raises
    ------
    SingularMatrixError
        If elimination meets a pivot at or below ``rtol * max|a|``; the
        exception reports the pivot magnitude.
    """
    return lu_solve(lu_factor(a, rtol), b)


def jacobi_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps rotate every off-diagonal pair per pass until the off-diagonal
    Frobenius mass falls below ``tol`` relative to the matrix norm.
    """
    a = np.array(_as_square(a), dtype=float)
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = float(np.sqrt(np.sum(a * a) - np.sum(a.diagonal() ** 2)))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # entries that no longer perturb the diagonal are zeroed
                # outright; rotating on them would overflow theta
                g = 100.0 * abs(apq)
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    return np.sort(a.diagonal())
