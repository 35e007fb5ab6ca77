"""Cyclic Jacobi eigensolver for small dense real symmetric matrices."""
from __future__ import annotations

import warnings

import numpy as np

from .errors import FormatError, NumericsError


def check_symmetric(a, rtol: float = 1e-12) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FormatError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise FormatError("matrix contains non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > rtol * scale:
        raise FormatError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def _off(a):
    return np.linalg.norm(a - np.diag(np.diag(a)))


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition by cyclic-by-row Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ascending and eigenvectors in the
    columns of ``v`` so that ``a = v @ diag(w) @ v.T``.  Iterates until the
    off-diagonal Frobenius norm drops below ``tol * ||a||_F``.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if n < 2 or norm == 0.0:
        order = np.argsort(np.diag(a), kind="stable")
        return np.diag(a)[order], v[:, order]
    target = tol * norm
    for _ in range(max_sweeps):
        if _off(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off(a) > target:
            raise NumericsError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {_off(a):.3e}, target {target:.3e})"
            )
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sym_eig(H, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigenvalues (ascending) and the row-orthogonal transform of ``H``.

    The returned matrix ``u`` has one eigenvector per row, ``u @ H @ u.T`` is
    diagonal, and each row is gauge-fixed so its largest-magnitude entry is
    positive.
    """
    w, v = jacobi_eigh(H, tol=tol, max_sweeps=max_sweeps)
    u = v.T.copy()
    for row in u:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1
    if len(w) > 1:
        scale = np.max(np.abs(w)) or 1.0
        gaps = np.diff(w) / scale
        if np.any(gaps < 1e-10):
            warnings.warn(
                "near-degenerate eigenvalues: the eigenbasis (and with it the "
                "participation/sign attribution) is not unique",
                RuntimeWarning,
                stacklevel=2,
            )
    return w, u
