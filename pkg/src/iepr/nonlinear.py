"""Normal-mode Kerr parameters from the bare anharmonicities and U.

All quantities in MHz.  The quartic junction term, rewritten in normal-mode
operators, gives to first order in the anharmonicities

    chi_mn      = 2 sum_k u_mk^2 u_nk^2 (w'_m w'_n / w_k^2) alpha_k
    alpha'_m    = sum_k u_mk^4 (w'_m^2 / w_k^2) alpha_k   (= chi_mm / 2)
    w'^nl_m     = w'_m + 1/2 sum_k chi_mk                  (k = m included)
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import SpecError


class KerrMethod(str, Enum):
    IEPR = "IEPR"
    EPR_FORMULA = "EPR_formula"
    ORACLE = "oracle"


@dataclass(frozen=True)
class NonlinearParameters:
    """Renormalized frequencies, self-Kerr and cross-Kerr of the normal modes.

    ``names`` labels each mode by the element it is mostly localized on.
    ``chi`` is stored with its diagonal (chi_mm = 2 alpha'_m).
    """

    names: tuple[str, ...]
    omega_prime_nl: np.ndarray
    alpha_prime: np.ndarray
    chi: np.ndarray
    method: KerrMethod = KerrMethod.IEPR

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "omega_prime_nl", np.asarray(self.omega_prime_nl, dtype=float))
        object.__setattr__(self, "alpha_prime", np.asarray(self.alpha_prime, dtype=float))
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float))
        object.__setattr__(self, "method", KerrMethod(self.method))

    def reorder(self, names: Sequence[str]) -> "NonlinearParameters":
        """Same parameters with modes listed in the order of ``names``."""
        idx = [self.names.index(n) for n in names]
        return NonlinearParameters(
            tuple(names),
            self.omega_prime_nl[idx],
            self.alpha_prime[idx],
            self.chi[np.ix_(idx, idx)],
            self.method,
        )

    def cross(self, a: str, b: str) -> float:
        return float(self.chi[self.names.index(a), self.names.index(b)])


def _u(U):
    return np.asarray(getattr(U, "u", U), dtype=float)


def _weights(omega_bare, alpha_bare):
    w = np.asarray(omega_bare, dtype=float)
    a = np.asarray(alpha_bare, dtype=float)
    # linear elements carry alpha = 0 exactly and may have unknown frequency
    safe = np.where(a != 0, w, 1.0)
    return np.where(a != 0, a / safe**2, 0.0)


def _nonlinear_columns(U, omega_bare, alpha_bare):
    # only junction columns enter; the others may be unknown (NaN)
    c = _weights(omega_bare, alpha_bare)
    keep = c != 0
    return _u(U)[:, keep], c[keep]


def cross_kerr(U, omega_prime, omega_bare, alpha_bare) -> np.ndarray:
    u, c = _nonlinear_columns(U, omega_bare, alpha_bare)
    u2 = u**2
    wp = np.asarray(omega_prime, dtype=float)
    return 2 * np.outer(wp, wp) * ((u2 * c) @ u2.T)


def self_kerr(U, omega_prime, omega_bare, alpha_bare) -> np.ndarray:
    u, c = _nonlinear_columns(U, omega_bare, alpha_bare)
    wp = np.asarray(omega_prime, dtype=float)
    return wp**2 * ((u**4) @ c)


def renormalized_frequencies(omega_prime, chi) -> np.ndarray:
    return np.asarray(omega_prime, dtype=float) + 0.5 * np.asarray(chi).sum(axis=1)


def normal_parameters(U, omega_prime, bare, names: Sequence[str] | None = None) -> NonlinearParameters:
    """IEPR-route nonlinear parameters for a bare model and its transform."""
    chi = cross_kerr(U, omega_prime, bare.omega, bare.alpha)
    alpha_p = self_kerr(U, omega_prime, bare.omega, bare.alpha)
    names = names if names is not None else bare.names
    return NonlinearParameters(
        names, renormalized_frequencies(omega_prime, chi), alpha_p, chi, KerrMethod.IEPR
    )


def epr_formula_kerr(p, omega_prime, E_J, names: Sequence[str] | None = None) -> NonlinearParameters:
    """Kerr parameters from junction energy participations.

    ``p[m, j]`` is the participation of mode m in junction j and ``E_J`` the
    Josephson energies in MHz (E_J/h).
        alpha'_m = -sum_j w'_m^2 p_mj^2 / (8 E_J,j)
        chi_mn   = -sum_j w'_m w'_n p_mj p_nj / (4 E_J,j)
        w'^nl_m  = w'_m + alpha'_m + 1/2 sum_{n != m} chi_mn
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    EJ = np.atleast_1d(np.asarray(E_J, dtype=float))
    wp = np.atleast_1d(np.asarray(omega_prime, dtype=float))
    if p.shape[1] != EJ.shape[0]:
        raise SpecError(f"participation matrix has {p.shape[1]} junction columns but {len(EJ)} E_J values")
    if p.shape[0] != wp.shape[0]:
        raise SpecError("participation matrix rows do not match the number of modes")
    if np.any(EJ <= 0):
        raise SpecError("Josephson energies must be positive")
    alpha_p = -(wp**2) * ((p**2) @ (1 / (8 * EJ)))
    chi = -np.outer(wp, wp) * ((p / (4 * EJ)) @ p.T)
    off = chi.sum(axis=1) - np.diag(chi)
    omega_nl = wp + alpha_p + 0.5 * off
    names = names if names is not None else tuple(f"mode{m}" for m in range(len(wp)))
    return NonlinearParameters(names, omega_nl, alpha_p, chi, KerrMethod.EPR_FORMULA)


@dataclass(frozen=True)
class LossSpec:
    """Readout-chain inputs for the closed-form loss rates (MHz, Ohm)."""

    omega_r: float
    g_rt: float
    g_qr: float
    Delta_qr: float
    Z_t: float = 50.0

    def __post_init__(self):
        if not self.omega_r > 0:
            raise SpecError("resonator frequency must be positive")


def loss_rates(spec: LossSpec):
    """Resonator decay kappa_r = 4 g_rt^2 / w_r and Purcell rate (g_qr/Delta)^2 kappa_r."""
    if spec.Delta_qr == 0:
        raise SpecError("qubit-resonator detuning must be nonzero")
    kappa = 4 * spec.g_rt**2 / spec.omega_r
    gamma = (spec.g_qr / spec.Delta_qr) ** 2 * kappa
    return kappa, gamma


def kappa_from_capacitance(Z_t: float, omega_r: float, C_rt: float, C_r: float) -> float:
    """kappa_r = Z_t w_r^2 C_rt^2 / C_r, returned as an ordinary frequency in MHz.

    ``omega_r`` in MHz, capacitances in fF, ``Z_t`` in Ohm.
    """
    w = 2 * np.pi * omega_r * 1e6
    kappa = Z_t * w**2 * (C_rt * 1e-15) ** 2 / (C_r * 1e-15)
    return float(kappa / (2 * np.pi) / 1e6)
