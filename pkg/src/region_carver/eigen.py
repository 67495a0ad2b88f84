"""Cyclic Jacobi eigendecomposition for small symmetric real matrices."""

from __future__ import annotations

import numpy as np


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi.

    Returns (eigenvalues, eigenvectors) with eigenvalues in descending order
    and eigenvectors as matching columns.  Iterates full sweeps of Givens
    rotations until the off-diagonal norm drops below ``tol`` relative to the
    Frobenius norm at entry.
    """
    A = np.array(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2) * 2.0)
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                V = V @ rot
    order = np.argsort(np.diag(A))[::-1]
    return np.diag(A)[order].copy(), V[:, order].copy()


def normalize_sign(v: np.ndarray) -> np.ndarray:
    """Flip so the first coordinate of meaningful size is positive."""
    norm = np.linalg.norm(v)
    for vi in v:
        if abs(vi) > 1e-12 * norm:
            return v if vi > 0 else -v
    return v
