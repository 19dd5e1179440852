"""Dense symmetric eigendecomposition via cyclic Jacobi rotations.

Dependency-free and accurate to machine precision, which is all the
small matrices arising in derivative-free model building require.
"""

from __future__ import annotations

import math

import numpy as np

_EPS = np.finfo(float).eps


def _off_diagonal_norm(a: np.ndarray) -> float:
    n = a.shape[0]
    total = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            total += a[p, q] * a[p, q]
    return math.sqrt(2.0 * total)


def jacobi_eigendecomposition(matrix: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` in ascending order and
    orthonormal eigenvectors in the columns of ``v``.  Input symmetry is
    the caller's responsibility; only the upper triangle drives the
    rotations and the matrix is symmetrized on entry.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v

    scale = max(1.0, float(np.linalg.norm(a, "fro")))
    tol = n * _EPS * scale
    for _ in range(max_sweeps):
        if _off_diagonal_norm(a) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= _EPS * scale * 1e-3:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-300 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def clip_eigenvalues(matrix: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """Project a symmetric matrix onto the set with spectrum in [lower, upper]."""
    if lower > upper:
        raise ValueError(f"empty eigenvalue interval [{lower}, {upper}]")
    w, v = jacobi_eigendecomposition(matrix)
    clipped = np.clip(w, lower, upper)
    out = (v * clipped) @ v.T
    return 0.5 * (out + out.T)
