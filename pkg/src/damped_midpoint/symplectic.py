"""Symplectic-structure toolkit for small dense matrices.

Provides the canonical form J, Frobenius-norm defects measuring distance
from the symplectic group Sp(2n) and its Lie algebra sp(2n), and the
Cayley transform carrying one into the other. Membership is always decided
numerically, as a defect against an explicit tolerance.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import DimensionError

#: Default defect tolerance below which a matrix counts as symplectic.
SYMPLECTIC_TOL = 1e-10


def symplectic_form(n: int) -> np.ndarray:
    """Return the canonical 2n-by-2n form J = [[0, I], [-I, 0]].

    Entries are exactly 0, +1 and -1; the returned array is read-only.
    """
    n = int(n)
    if n < 1:
        raise DimensionError(f"degrees of freedom must be >= 1, got {n}")
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    j.setflags(write=False)
    return j


def _validated_pair(mat, form):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
    if mat.shape[0] % 2 != 0 or mat.shape[0] == 0:
        raise DimensionError(f"expected even size 2n >= 2, got {mat.shape[0]}")
    if form is None:
        form = symplectic_form(mat.shape[0] // 2)
    elif np.shape(form) != mat.shape:
        raise DimensionError(
            f"form has shape {np.shape(form)}, matrix has shape {mat.shape}"
        )
    return mat, np.asarray(form, dtype=float)


def infinitesimal_symplectic_defect(b, form=None) -> float:
    """Frobenius norm of J·B + Bᵀ·J; zero iff B lies in sp(2n)."""
    b, j = _validated_pair(b, form)
    return float(np.linalg.norm(j @ b + b.T @ j))


def symplectic_defect(f, form=None) -> float:
    """Frobenius norm of Fᵀ·J·F - J; zero iff F lies in Sp(2n)."""
    f, j = _validated_pair(f, form)
    return float(np.linalg.norm(f.T @ (j @ f) - j))


def factored_symplectic_defect(a, b, form=None) -> float:
    """Frobenius norm of A·J·Aᵀ - B·J·Bᵀ.

    A vanishing value certifies A⁻¹·B symplectic without ever forming the
    inverse, which is how the implicit-scheme transition matrices are
    classified from their factor pairs.
    """
    a, j = _validated_pair(a, form)
    b, _ = _validated_pair(b, j)
    if b.shape != a.shape:
        raise DimensionError(f"factor shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a @ j @ a.T - b @ j @ b.T))


def cayley(b) -> np.ndarray:
    """Cayley transform (I - B)⁻¹ (I + B).

    Maps sp(2n) into Sp(2n) wherever I - B is nonsingular; a singular
    denominator factor raises :class:`SingularMatrixError` rather than
    returning non-finite entries.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {b.shape}")
    eye = np.eye(b.shape[0])
    return linalg.solve(eye - b, eye + b)
