"""Quadratic-form matrix, normal-mode decomposition and forward synthesis.

The forward model stands in for an EM eigenmode simulation: given bare
parameters it produces normal-mode frequencies together with the
participation matrix r = u**2 and the sign matrix s = sign(u).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circuit import BareParameters
from .errors import FormatError, PhysicsError
from .jacobi import check_symmetric, sym_eig


class Provenance(str, Enum):
    SYNTHETIC = "synthetic"
    FIELD_EXPORT = "field_export"


@dataclass(frozen=True)
class TransformMatrix:
    """Orthogonal matrix linking bare and normal representations.

    Row m is normal mode m, column k is bare element k.
    """

    u: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise FormatError(f"transform matrix must be square, got {u.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def residual(self) -> float:
        """max |U U^T - I| (row orthonormality)."""
        return float(np.max(np.abs(self.u @ self.u.T - np.eye(self.n))))


@dataclass(frozen=True)
class NormalModeSet:
    """Normal-mode payload: frequencies, participation and sign matrices.

    ``r`` and ``s`` are indexed [mode, element].  Columns of elements without
    potential nodes may be NaN; ``s`` may be None for raw field data that has
    not been through sign determination.
    """

    names: tuple[str, ...]
    omega_prime: np.ndarray
    r: np.ndarray
    s: np.ndarray | None
    provenance: Provenance = Provenance.SYNTHETIC

    def __post_init__(self):
        n = len(self.names)
        w = np.asarray(self.omega_prime, dtype=float).reshape(-1)
        r = np.asarray(self.r, dtype=float)
        if w.shape != (n,) or r.shape != (n, n):
            raise FormatError(
                f"normal-mode set needs {n} frequencies and an {n}x{n} participation matrix"
            )
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise FormatError("normal-mode frequencies must be positive")
        known = ~np.isnan(r)
        bad = np.argwhere(known & ((r < 0) | (r > 1)))
        if len(bad):
            m, k = bad[0]
            raise FormatError(f"r out of [0,1] at ({m},{k}): {r[m, k]}")
        if self.s is not None:
            s = np.asarray(self.s, dtype=float)
            if s.shape != (n, n):
                raise FormatError("sign matrix shape does not match")
            bad = np.argwhere(~np.isnan(s) & (np.abs(s) != 1))
            if len(bad):
                m, k = bad[0]
                raise FormatError(f"sign matrix entry at ({m},{k}) is {s[m, k]}, expected +1 or -1")
            object.__setattr__(self, "s", s)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "omega_prime", w)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def assignment(self) -> tuple[str, ...]:
        """Element with the largest participation in each mode."""
        r = np.nan_to_num(self.r, nan=-1.0)
        return tuple(self.names[k] for k in np.argmax(r, axis=1))

    @property
    def missing_columns(self) -> list[int]:
        return [k for k in range(self.n) if np.any(np.isnan(self.r[:, k]))]


def assemble_H_matrix(bare: BareParameters) -> np.ndarray:
    """Matrix of the charge quadratic form in MHz^2.

    Diagonal w_m^2, off-diagonal 2 g_mn sqrt(w_m w_n).
    """
    w = bare.omega
    H = 2 * bare.g * np.sqrt(np.outer(w, w))
    H[np.diag_indices_from(H)] = w**2
    return H


def bare_from_H(H, names, L_J=None) -> BareParameters:
    """Inverse of :func:`assemble_H_matrix`."""
    H = check_symmetric(H)
    d = np.diag(H)
    if np.any(d <= 0):
        raise PhysicsError("non-positive diagonal in the quadratic form")
    w = np.sqrt(d)
    g = H / (2 * np.sqrt(np.outer(w, w)))
    g[np.diag_indices_from(g)] = 0.0
    return BareParameters(tuple(names), w, g, None, L_J)


def signs_of(u) -> np.ndarray:
    """Elementwise sign with exact zeros mapped to +1."""
    return np.where(np.asarray(u) < 0, -1.0, 1.0)


def forward_synthesize(bare: BareParameters):
    """Normal-mode data for a bare model: ``(NormalModeSet, TransformMatrix)``.

    Modes are ordered by ascending frequency; ``NormalModeSet.assignment``
    records which element each mode belongs to.
    """
    lam, u = sym_eig(assemble_H_matrix(bare))
    if np.any(lam <= 0):
        k = int(np.argmin(lam))
        raise PhysicsError(
            f"non-positive eigenvalue {lam[k]:.6g} MHz^2 for mode {k}: the circuit is overcoupled"
        )
    modes = NormalModeSet(bare.names, np.sqrt(lam), u**2, signs_of(u), Provenance.SYNTHETIC)
    return modes, TransformMatrix(u, bare.names)
