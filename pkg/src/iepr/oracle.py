"""Truncated Fock-space verification of the normal-mode Kerr parameters.

Builds the bare nonlinear Hamiltonian

    H = sum_m w^nl_m n_m + (alpha_m / 2) a_m^+2 a_m^2
        - sum_{m<n} g_mn (a_m^+ - a_m)(a_n^+ - a_n)

in the product number basis (no rotating-wave approximation on the
coupling), diagonalizes it densely, labels eigenstates by their largest
overlap with bare product states and reads off

    w'^nl_m = E(1_m),  alpha'_m = E(2_m) - 2 E(1_m),
    chi_mn  = E(1_m 1_n) - E(1_m) - E(1_n).

The per-pair cross-Kerr readout for three modes extends the two-mode
relations in the obvious way.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .circuit import BareParameters, charging_ratio
from .errors import LabelWarning, OracleError, ResourceError, SpecError
from .nonlinear import KerrMethod, NonlinearParameters

TRANSMON_LIMIT = 1 / 50


@dataclass(frozen=True)
class FockConfig:
    levels_per_mode: int = 6
    convergence_levels: int = 8
    max_modes: int = 3
    max_dim: int = 4096
    label_gap: float = 0.05

    def __post_init__(self):
        if self.levels_per_mode < 3:
            raise SpecError("at least 3 levels per mode are needed to resolve anharmonicities")
        if self.levels_per_mode >= self.convergence_levels:
            raise SpecError("convergence_levels must exceed levels_per_mode")


@dataclass
class FockSpectrum:
    names: tuple[str, ...]
    labels: list[tuple[int, ...]]
    energies: np.ndarray
    overlaps: np.ndarray
    ambiguous: dict = field(default_factory=dict)

    def energy(self, label) -> float:
        try:
            return float(self.energies[self.labels.index(tuple(label))])
        except ValueError:
            raise OracleError(f"state {tuple(label)} was not labeled") from None


def _ladder(levels):
    return np.diag(np.sqrt(np.arange(1, levels)), k=1)


def _embed(op, m, n_modes, levels):
    out = np.array([[1.0]])
    eye = np.eye(levels)
    for k in range(n_modes):
        out = np.kron(out, op if k == m else eye)
    return out


def build_fock_hamiltonian(bare: BareParameters, cfg: FockConfig = FockConfig(), levels: int | None = None):
    """Dense Hamiltonian matrix (MHz) of the bare nonlinear model."""
    levels = cfg.levels_per_mode if levels is None else levels
    n = bare.n
    if n > cfg.max_modes:
        raise ResourceError(f"{n} modes exceed the oracle limit of {cfg.max_modes}")
    dim = levels**n
    if dim > cfg.max_dim:
        raise ResourceError(f"Hilbert-space dimension {dim} exceeds the cap {cfg.max_dim}")
    a1 = _ladder(levels)
    num1 = a1.T @ a1
    kerr1 = a1.T @ a1.T @ a1 @ a1
    H = np.zeros((dim, dim))
    w_nl = bare.omega_nl
    for m in range(n):
        H += w_nl[m] * _embed(num1, m, n, levels)
        if bare.alpha[m] != 0:
            H += 0.5 * bare.alpha[m] * _embed(kerr1, m, n, levels)
    for m, k in itertools.combinations(range(n), 2):
        if bare.g[m, k] != 0:
            xm = _embed(a1.T - a1, m, n, levels)
            xk = _embed(a1.T - a1, k, n, levels)
            H -= bare.g[m, k] * (xm @ xk)
    return H


def _state_index(label, levels):
    idx = 0
    for k in label:
        idx = idx * levels + k
    return idx


def default_labels(n_modes: int):
    """Product states with at most two excitations."""
    return [lab for lab in itertools.product(range(3), repeat=n_modes) if sum(lab) <= 2]


def labeled_spectrum(H, cfg: FockConfig = FockConfig(), names=(), levels: int | None = None) -> FockSpectrum:
    """Diagonalize ``H`` and label the low-lying eigenstates."""
    H = np.asarray(H, dtype=float)
    levels = cfg.levels_per_mode if levels is None else levels
    n_modes = int(round(np.log(H.shape[0]) / np.log(levels)))
    if levels**n_modes != H.shape[0]:
        raise SpecError(f"dimension {H.shape[0]} is not a power of {levels}")
    if np.max(np.abs(H - H.T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise SpecError("Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(H)
    labels = default_labels(n_modes)
    rows = [_state_index(lab, levels) for lab in labels]
    amp = np.abs(evecs[rows, :])
    li, ki = linear_sum_assignment(-(amp**2))
    chosen = np.empty(len(labels), dtype=int)
    chosen[li] = ki
    overlaps = amp[np.arange(len(labels)), chosen]
    ambiguous = {}
    for i, lab in enumerate(labels):
        top2 = np.sort(amp[i])[-2:]
        if top2[1] - top2[0] < cfg.label_gap:
            cand = np.argsort(amp[i])[-2:][::-1]
            ambiguous[lab] = [(int(k), float(amp[i, k]), float(evals[k])) for k in cand]
    if ambiguous:
        warnings.warn(
            f"ambiguous eigenstate labels for {sorted(ambiguous)}: states are strongly hybridized",
            LabelWarning,
            stacklevel=2,
        )
    ground = chosen[labels.index((0,) * n_modes)]
    energies = evals[chosen] - evals[ground]
    names = tuple(names) or tuple(f"mode{m}" for m in range(n_modes))
    return FockSpectrum(names, labels, energies, overlaps, ambiguous)


def oracle_parameters(spec: FockSpectrum) -> NonlinearParameters:
    n = len(spec.names)
    E1 = np.empty(n)
    alpha = np.empty(n)
    chi = np.zeros((n, n))
    for m in range(n):
        one = [0] * n
        one[m] = 1
        two = [0] * n
        two[m] = 2
        E1[m] = spec.energy(one)
        alpha[m] = spec.energy(two) - 2 * E1[m]
        chi[m, m] = 2 * alpha[m]
    for m, k in itertools.combinations(range(n), 2):
        lab = [0] * n
        lab[m] = lab[k] = 1
        chi[m, k] = chi[k, m] = spec.energy(lab) - E1[m] - E1[k]
    return NonlinearParameters(spec.names, E1, alpha, chi, KerrMethod.ORACLE)


def run_oracle(bare: BareParameters, cfg: FockConfig = FockConfig(), levels: int | None = None):
    """Build, diagonalize and read out; returns ``(NonlinearParameters, FockSpectrum)``."""
    H = build_fock_hamiltonian(bare, cfg, levels)
    spec = labeled_spectrum(H, cfg, bare.names, levels)
    return oracle_parameters(spec), spec


@dataclass
class ConvergenceReport:
    base: NonlinearParameters
    refined: NonlinearParameters
    shifts: dict
    threshold: float
    passed: bool
    spectrum: FockSpectrum = None
    charging_ratios: dict = field(default_factory=dict)
    reasons: list = field(default_factory=list)


def _rel_shift(a, b, floor=1e-6):
    """Relative change; differences below ``floor`` MHz count as zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = np.abs(a - b)
    rel = diff / np.maximum(np.abs(b), 1e-300)
    return float(np.max(np.where(diff < floor, 0.0, rel), initial=0.0))


def convergence_check(
    bare: BareParameters,
    cfg: FockConfig = FockConfig(),
    threshold: float = 0.01,
    regime_limit: float = TRANSMON_LIMIT,
) -> ConvergenceReport:
    """Certify oracle results.

    Reruns the oracle with more levels and flags parameters that move by
    more than ``threshold``.  The Kerr-truncated Hamiltonian converges in
    the level count even where it stops describing a junction, so junction
    elements with E_C/E_J above ``regime_limit`` are flagged as well.
    """
    base, spec = run_oracle(bare, cfg, cfg.levels_per_mode)
    refined, _ = run_oracle(bare, cfg, cfg.convergence_levels)
    shifts = {
        "omega_prime_nl": _rel_shift(base.omega_prime_nl, refined.omega_prime_nl),
        "alpha_prime": _rel_shift(base.alpha_prime, refined.alpha_prime),
        "chi": _rel_shift(base.chi, refined.chi),
    }
    reasons = [f"{k} shifted by {v:.2%} between {cfg.levels_per_mode} and "
               f"{cfg.convergence_levels} levels" for k, v in shifts.items() if v > threshold]
    ratios = {}
    for k in np.flatnonzero(bare.L_J > 0):
        ratios[bare.names[k]] = charging_ratio(bare.omega[k], bare.L_J[k])
        if ratios[bare.names[k]] > regime_limit:
            reasons.append(f"{bare.names[k]}: E_C/E_J = {ratios[bare.names[k]]:.3g} is outside "
                           f"the transmon regime (limit {regime_limit:.3g})")
    return ConvergenceReport(base, refined, shifts, threshold, not reasons, spec, ratios, reasons)
