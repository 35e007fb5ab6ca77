"""Inverse IEPR pipeline: (r, s, omega') -> bare frequencies and couplings.

The same algebra applies unchanged to capacitive-energy participation data
of inductively coupled circuits; only the provenance of r differs.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import BareParameters, attach_anharmonicity
from .errors import ConsistencyError, FormatError, UnsupportedError
from .modal import NormalModeSet, Provenance, TransformMatrix

SYNTHETIC_TOL = 1e-8
FIELD_TOL = 1e-3


def _check_rs(r, s):
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if r.shape != s.shape or r.ndim != 2:
        raise FormatError(f"r and s must be matrices of equal shape, got {r.shape} and {s.shape}")
    return r, s


def orthonormality_check(r, s):
    """Residuals of the row and column orthonormality relations.

    Returns ``(rows, cols, max_abs)`` where ``rows = U U^T - I`` and
    ``cols = U^T U - I`` with u = s sqrt(r).
    """
    r, s = _check_rs(r, s)
    u = s * np.sqrt(r)
    eye = np.eye(u.shape[0])
    rows = u @ u.T - eye
    cols = u.T @ u - eye
    return rows, cols, float(max(np.max(np.abs(rows)), np.max(np.abs(cols))))


def reconstruct_U(r, s, tol: float = FIELD_TOL, names: Sequence[str] = ()) -> TransformMatrix:
    """u_mn = s_mn sqrt(r_mn); rejects data whose orthonormality residual exceeds ``tol``."""
    r, s = _check_rs(r, s)
    if np.any(np.isnan(r)) or np.any(np.isnan(s)):
        raise FormatError("r or s has missing entries; complete missing columns first")
    if np.any((r < 0) | (r > 1)):
        raise FormatError("participation ratios must lie in [0, 1]")
    if np.any(np.abs(s) != 1):
        raise FormatError("sign matrix entries must be +1 or -1")
    _, _, res = orthonormality_check(r, s)
    if res > tol:
        raise ConsistencyError(
            f"orthonormality residual {res:.3e} exceeds {tol:.1e}: not a valid participation set"
        )
    return TransformMatrix(s * np.sqrt(r), names)


def bare_frequencies(r, omega_prime) -> np.ndarray:
    """w_n = sqrt(sum_k r_kn w'_k^2), one value per element (column)."""
    r = np.asarray(r, dtype=float)
    w = np.asarray(omega_prime, dtype=float)
    return np.sqrt(r.T @ w**2)


def coupling_strengths(r, s, omega_prime, omega_bare, check: bool = True) -> np.ndarray:
    """g_mn = sum_k s_km s_kn sqrt(r_km r_kn) w'_k^2 / (2 sqrt(w_m w_n)), zero diagonal."""
    r, s = _check_rs(r, s)
    u = s * np.sqrt(r)
    wb = np.asarray(omega_bare, dtype=float)
    H = u.T @ np.diag(np.asarray(omega_prime, dtype=float) ** 2) @ u
    if check and not np.allclose(np.diag(H), wb**2, rtol=1e-9, atol=0):
        warnings.warn("diagonal of the coupling sum does not reproduce the bare frequencies",
                      RuntimeWarning, stacklevel=2)
    g = H / (2 * np.sqrt(np.outer(wb, wb)))
    g = 0.5 * (g + g.T)
    g[np.diag_indices_from(g)] = 0.0
    return g


def complete_missing_column(partial, missing) -> TransformMatrix:
    """Fill one unknown column of an orthogonal matrix from the others.

    ``partial`` is the n x n matrix with the unknown column set to NaN (its
    contents are ignored); ``missing`` is the column index.  The completed
    column is the unit vector orthogonal to all known columns, signed so its
    largest-magnitude entry is positive.
    """
    u = np.array(partial, dtype=float)
    missing = [missing] if np.isscalar(missing) else sorted(set(missing))
    if len(missing) > 1:
        raise UnsupportedError(
            f"{len(missing)} elements lack potential nodes; at most one column can be "
            "recovered from orthonormality"
        )
    if not missing:
        return TransformMatrix(u)
    n = u.shape[0]
    col = missing[0]
    known = [k for k in range(n) if k != col]
    A = u[:, known]
    if np.any(~np.isfinite(A)):
        raise FormatError("known columns contain non-finite entries")
    res = np.max(np.abs(A.T @ A - np.eye(len(known))), initial=0.0)
    if res > 1e-6:
        raise ConsistencyError(f"known columns are not orthonormal (residual {res:.3e})")
    # null space of A^T: last left singular vector
    U_svd, _, _ = np.linalg.svd(A, full_matrices=True)
    v = U_svd[:, -1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    u[:, col] = v
    return TransformMatrix(u)


def _assign(u, names, known):
    """Label each mode by its dominant element; modes dominated by no known column get mode<m>."""
    r = u[:, known] ** 2
    labels = []
    for m in range(u.shape[0]):
        k = int(np.argmax(r[m]))
        if len(known) == u.shape[1] or r[m, k] >= 0.5:
            labels.append(names[known[k]])
        else:
            labels.append(f"mode{m}")
    return tuple(labels)


@dataclass
class ExtractionReport:
    bare: BareParameters
    U: TransformMatrix
    omega_prime: np.ndarray
    orthonormality_residual: float
    assignment: tuple[str, ...] = ()
    normal: object = None
    unresolved: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def coupling(self, a: str, b: str) -> float:
        """Coupling between two elements; fails for pairs the data cannot resolve."""
        i, j = self.bare.index(a), self.bare.index(b)
        if self.unresolved and (a in self.unresolved or b in self.unresolved):
            raise UnsupportedError(
                f"coupling {a}-{b} needs the participation column of a node-less element; "
                "not recoverable when more than one element lacks potential nodes"
            )
        return float(self.bare.g[i, j])


def extract_all(
    modes: NormalModeSet,
    L_J: Mapping[str, float] | Sequence[float] | None = None,
    tol: float | None = None,
    nonlinear: bool = True,
) -> ExtractionReport:
    """Bare Hamiltonian (and normal-mode Kerr parameters) from normal-mode data.

    Columns of r that are NaN mark elements without potential nodes.  One
    such column is recovered from orthonormality.  With two or more, the
    Kerr parameters (which only need junction columns) are still computed,
    but frequencies and couplings of the node-less elements are left NaN and
    :meth:`ExtractionReport.coupling` refuses them.
    """
    from .nonlinear import normal_parameters

    n = modes.n
    if modes.s is None:
        hint = (" run the field postprocessing sign determination (`iepr fields`) first"
                if modes.provenance is Provenance.FIELD_EXPORT else "")
        raise FormatError("normal-mode set has no sign matrix;" + hint)
    if tol is None:
        tol = SYNTHETIC_TOL if modes.provenance is Provenance.SYNTHETIC else FIELD_TOL
    if L_J is None:
        LJ = np.zeros(n)
    elif isinstance(L_J, Mapping):
        unknown = set(L_J) - set(modes.names)
        if unknown:
            raise FormatError(f"junction inductance given for unknown elements {sorted(unknown)}")
        LJ = np.array([float(L_J.get(name, 0.0)) for name in modes.names])
    else:
        LJ = np.asarray(L_J, dtype=float)

    notes = []
    missing = modes.missing_columns
    unresolved = []
    s = modes.s.copy()
    if len(missing) == 1:
        k = missing[0]
        partial = s * np.sqrt(np.nan_to_num(modes.r, nan=0.0))
        U = complete_missing_column(partial, k)
        u = U.u
        notes.append(f"column {modes.names[k]} completed from orthonormality")
    elif len(missing) > 1:
        unresolved = [modes.names[k] for k in missing]
        u = s * np.sqrt(modes.r)
        notes.append(f"elements {unresolved} lack potential nodes; their couplings are unresolved")
    else:
        u = reconstruct_U(modes.r, s, tol=tol).u

    known = [k for k in range(n) if modes.names[k] not in unresolved]
    if unresolved:
        uk = u[:, known]
        res = float(np.max(np.abs(uk.T @ uk - np.eye(len(known))), initial=0.0))
    else:
        rows, cols, res = orthonormality_check(u**2, np.where(u < 0, -1.0, 1.0))
    if res > tol:
        raise ConsistencyError(f"orthonormality residual {res:.3e} exceeds {tol:.1e}")

    w_prime = modes.omega_prime
    omega = np.full(n, np.nan)
    g = np.full((n, n), np.nan)
    omega[known] = bare_frequencies(u[:, known] ** 2, w_prime)
    sub = u[:, known]
    g_known = coupling_strengths(sub**2, np.where(sub < 0, -1.0, 1.0), w_prime, omega[known])
    g[np.ix_(known, known)] = g_known
    np.fill_diagonal(g, 0.0)

    if unresolved:
        # BareParameters demands finite values; store NaN-free placeholders and
        # remember which entries are meaningless.
        omega_safe = np.where(np.isnan(omega), 1.0, omega)
        bare = BareParameters(modes.names, omega_safe, np.nan_to_num(g), None, LJ)
        bare = attach_anharmonicity(bare)
        object.__setattr__(bare, "omega", omega)
        object.__setattr__(bare, "g", g)
    else:
        bare = attach_anharmonicity(BareParameters(modes.names, omega, g, None, LJ))

    U = TransformMatrix(u, modes.names)
    assignment = _assign(u, modes.names, known)
    report = ExtractionReport(bare, U, w_prime, res, assignment, None, unresolved, notes)
    if nonlinear and np.any(LJ > 0):
        report.normal = normal_parameters(U, w_prime, bare, assignment)
    return report
