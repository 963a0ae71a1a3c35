"""Hermitian eigensolver: cyclic Jacobi with complex plane rotations.

Kept dependency-light on purpose: the rest of the package only ever needs
full eigensystems of small (<= a few hundred) Hermitian matrices, and the
cyclic Jacobi method is simple, unconditionally stable, and easy to verify
against an independent characteristic-polynomial oracle.
"""
from __future__ import annotations

import numpy as np

__all__ = ["hermitian_eigensystem", "hermitian_eigenvalues"]

# Convergence: off-diagonal Frobenius norm below this (after scaling the
# input to unit Frobenius size) terminates the sweep loop.
_OFF_DIAG_TOL = 1e-12
_HERMITICITY_TOL = 1e-10
_MAX_SWEEPS = 100


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> tuple[float, float, complex]:
    """Return (c, s, phase) zeroing the (p, q) entry of a Hermitian 2x2 block.

    The unitary acting on the (p, q) plane is
        U[p,p] = c          U[p,q] = s
        U[q,p] = -s*conj(w) U[q,q] = c*conj(w)
    with w = apq/|apq|, so that U^dagger A U has zero (p, q) entry.
    """
    mag = abs(apq)
    w = apq / mag
    tau = (aqq - app) / (2.0 * mag)
    # smaller root of t^2 + 2*tau*t - 1 = 0 for stability
    if tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return c, s, w


def hermitian_eigensystem(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : (n, n) array_like
        Hermitian within 1e-10 (relative to its Frobenius norm).

    Returns
    -------
    eigenvalues : (n,) float ndarray, sorted descending.
    eigenvectors : (n, n) complex ndarray, column i pairs with eigenvalue i.

    The reconstruction V diag(w) V^dagger matches the input to better than
    1e-9 in Frobenius norm.
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - a.conj().T) > _HERMITICITY_TOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    # symmetrize roundoff and work on a unit-scale copy
    a = (a + a.conj().T) / (2.0 * scale)
    v = np.eye(n, dtype=complex)

    if n == 1:
        return np.array([a[0, 0].real * scale]), v

    threshold = _OFF_DIAG_TOL
    for _ in range(_MAX_SWEEPS):
        if _off_diagonal_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # skip entries that cannot affect convergence at tolerance
                if abs(apq) < threshold / (n * n):
                    continue
                c, s, w = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                # column update: A <- A U
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(w) * col_q
                a[:, q] = s * col_p + c * np.conj(w) * col_q
                # row update: A <- U^dagger A
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * w * row_q
                a[q, :] = s * row_p + c * w * row_q
                # exact zeros on the pivot, real diagonal
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                # accumulate eigenvectors: V <- V U
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * np.conj(w) * vcol_q
                v[:, q] = s * vcol_p + c * np.conj(w) * vcol_q
    else:
        raise RuntimeError("Jacobi sweep limit reached without convergence")

    eigenvalues = np.diag(a).real * scale
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues only, sorted descending."""
    return hermitian_eigensystem(matrix)[0]
