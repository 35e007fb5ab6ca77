"""Lumped circuit model and its quantization into bare-mode parameters.

Units used throughout the package: frequencies are ordinary frequencies
f = omega / 2pi in MHz, capacitances in fF, inductances in nH.  Formulas
that involve the flux quantum are evaluated in SI and converted back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .constants import CONSTANTS, FF, MHZ, NH
from .errors import FormatError, SpecError


class ElementKind(str, Enum):
    TRANSMON = "transmon"
    COUPLER = "coupler"
    RESONATOR = "resonator"
    CAVITY = "cavity"
    OTHER = "other"


class CouplingKind(str, Enum):
    CAPACITIVE = "capacitive"
    INDUCTIVE = "inductive"


def _positive(value, what):
    if value is None or not np.isfinite(value) or value <= 0:
        raise SpecError(f"{what} must be positive, got {value!r}")


@dataclass(frozen=True)
class ElementSpec:
    """One circuit element: a capacitor shunted by an inductor or junction."""

    name: str
    C: float
    L: float | None = None
    L_J: float | None = None
    kind: ElementKind = ElementKind.OTHER
    has_nodes: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ElementKind(self.kind))
        if (self.L is None) == (self.L_J is None):
            raise SpecError(
                f"element {self.name!r}: exactly one of L or L_J must be given"
            )
        _positive(self.C, f"element {self.name!r}: C")
        _positive(self.inductance, f"element {self.name!r}: inductance")

    @property
    def inductance(self) -> float:
        """Linear inductance in nH (L_J for junction elements)."""
        return self.L if self.L is not None else self.L_J

    @property
    def is_junction(self) -> bool:
        return self.L_J is not None


@dataclass(frozen=True)
class CouplingSpec:
    a: str
    b: str
    C_mutual: float | None = None
    M_mutual: float | None = None

    def __post_init__(self):
        if self.a == self.b:
            raise SpecError(f"coupling {self.a!r}-{self.b!r} couples an element to itself")
        if (self.C_mutual is None) == (self.M_mutual is None):
            raise SpecError(
                f"coupling {self.a!r}-{self.b!r}: exactly one of C_mutual or M_mutual must be given"
            )
        value = self.value
        if not np.isfinite(value) or value < 0:
            raise SpecError(f"coupling {self.a!r}-{self.b!r}: mutual term must be >= 0")

    @property
    def kind(self) -> CouplingKind:
        return CouplingKind.CAPACITIVE if self.C_mutual is not None else CouplingKind.INDUCTIVE

    @property
    def value(self) -> float:
        return self.C_mutual if self.C_mutual is not None else self.M_mutual


@dataclass(frozen=True)
class CircuitSpec:
    elements: tuple[ElementSpec, ...]
    couplings: tuple[CouplingSpec, ...] = ()
    coupling_kind: CouplingKind = CouplingKind.CAPACITIVE

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "coupling_kind", CouplingKind(self.coupling_kind))
        if not self.elements:
            raise SpecError("circuit has no elements")
        names = [el.name for el in self.elements]
        if len(set(names)) != len(names):
            raise SpecError(f"duplicate element names in {names}")
        seen = set()
        for cp in self.couplings:
            for end in (cp.a, cp.b):
                if end not in names:
                    raise SpecError(f"coupling references unknown element {end!r}")
            pair = frozenset((cp.a, cp.b))
            if pair in seen:
                raise SpecError(f"duplicate coupling between {cp.a!r} and {cp.b!r}")
            seen.add(pair)
            if cp.kind is not self.coupling_kind:
                raise SpecError(
                    f"coupling {cp.a!r}-{cp.b!r} is {cp.kind.value} but the circuit is "
                    f"{self.coupling_kind.value}; mixed coupling kinds are not supported"
                )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(el.name for el in self.elements)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SpecError(f"unknown element {name!r}") from None

    def element(self, name: str) -> ElementSpec:
        return self.elements[self.index(name)]

    def with_inductance(self, name: str, value: float) -> "CircuitSpec":
        """Copy of the circuit with element ``name``'s inductance replaced."""
        el = self.element(name)
        new = replace(el, L_J=value) if el.is_junction else replace(el, L=value)
        elements = tuple(new if e.name == name else e for e in self.elements)
        return replace(self, elements=elements)

    def mutual_matrix(self) -> np.ndarray:
        n = len(self.elements)
        m = np.zeros((n, n))
        for cp in self.couplings:
            i, j = self.index(cp.a), self.index(cp.b)
            m[i, j] = m[j, i] = cp.value
        return m


@dataclass(frozen=True)
class BareParameters:
    """Bare-mode parameters: frequencies, couplings, anharmonicities (MHz)."""

    names: tuple[str, ...]
    omega: np.ndarray
    g: np.ndarray
    alpha: np.ndarray = None
    L_J: np.ndarray = None

    def __post_init__(self):
        n = len(self.names)
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        g = np.asarray(self.g, dtype=float)
        alpha = np.zeros(n) if self.alpha is None else np.asarray(self.alpha, dtype=float)
        L_J = np.zeros(n) if self.L_J is None else np.asarray(self.L_J, dtype=float)
        if omega.shape != (n,) or g.shape != (n, n) or alpha.shape != (n,) or L_J.shape != (n,):
            raise SpecError("BareParameters arrays do not match the number of names")
        if np.any(~np.isfinite(omega)) or np.any(omega <= 0):
            raise SpecError(f"bare frequencies must be positive, got {omega}")
        if not np.allclose(g, g.T, rtol=1e-12, atol=0):
            raise SpecError("coupling matrix must be symmetric")
        if np.any(np.diag(g) != 0):
            raise SpecError("coupling matrix must have a zero diagonal")
        if np.any(alpha[L_J > 0] > 0):
            raise SpecError("junction anharmonicities must be <= 0")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "L_J", L_J)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def omega_nl(self) -> np.ndarray:
        """Bare frequencies corrected by the junction nonlinearity."""
        return self.omega + self.alpha

    def table(self) -> np.ndarray:
        """Matrix with bare frequencies on the diagonal and couplings off it."""
        return self.g + np.diag(self.omega)

    def index(self, name: str) -> int:
        return self.names.index(name)


def bare_frequency(L_nH, C_fF):
    """1 / (2 pi sqrt(LC)) in MHz."""
    return 1.0 / (2 * math.pi * np.sqrt(np.asarray(L_nH) * NH * np.asarray(C_fF) * FF)) / MHZ


def _circuit_arrays(circuit: CircuitSpec):
    C = np.array([el.C for el in circuit.elements])
    L = np.array([el.inductance for el in circuit.elements])
    L_J = np.array([el.L_J if el.is_junction else 0.0 for el in circuit.elements])
    return C, L, L_J


def build_bare_linear(circuit: CircuitSpec) -> BareParameters:
    """Bare parameters of a capacitively coupled circuit (linear stage).

    g_mn = C_mn sqrt(w_m w_n) / (2 sqrt(C_m C_n)), weak-coupling form.
    """
    if circuit.coupling_kind is not CouplingKind.CAPACITIVE:
        raise SpecError("build_bare_linear needs a capacitively coupled circuit")
    C, L, L_J = _circuit_arrays(circuit)
    omega = bare_frequency(L, C)
    g = circuit.mutual_matrix() * np.sqrt(np.outer(omega, omega)) / (2 * np.sqrt(np.outer(C, C)))
    return BareParameters(circuit.names, omega, g, np.zeros(len(C)), L_J)


def build_bare_inductive(circuit: CircuitSpec) -> BareParameters:
    """Bare parameters of an inductively coupled circuit.

    g_mn = M_mn sqrt(w_m w_n) / (2 sqrt(L_m L_n)).
    """
    if circuit.coupling_kind is not CouplingKind.INDUCTIVE:
        raise SpecError("build_bare_inductive needs an inductively coupled circuit")
    C, L, L_J = _circuit_arrays(circuit)
    omega = bare_frequency(L, C)
    g = circuit.mutual_matrix() * np.sqrt(np.outer(omega, omega)) / (2 * np.sqrt(np.outer(L, L)))
    return BareParameters(circuit.names, omega, g, np.zeros(len(C)), L_J)


def build_bare(circuit: CircuitSpec, nonlinear: bool = True) -> BareParameters:
    """Dispatch on the coupling kind; optionally attach junction anharmonicities."""
    if circuit.coupling_kind is CouplingKind.CAPACITIVE:
        bare = build_bare_linear(circuit)
    else:
        bare = build_bare_inductive(circuit)
    return attach_anharmonicity(bare) if nonlinear else bare


def attach_anharmonicity(bare: BareParameters) -> BareParameters:
    """Fill ``alpha`` from the junction inductances; linear elements get exactly 0."""
    alpha = np.zeros(bare.n)
    jj = bare.L_J > 0
    if np.any(jj):
        alpha[jj] = anharmonicity_from_LJ(bare.omega[jj], bare.L_J[jj])
    return replace(bare, alpha=alpha)


def anharmonicity_from_LJ(omega_bare, L_J):
    """Transmon anharmonicity -E_C/h in MHz from the bare frequency and L_J.

    alpha = -(2 pi^2 e^2 L_J / h) f^2, i.e. -e^2/(2C) with C = 1/((2 pi f)^2 L_J).
    """
    f = np.asarray(omega_bare, dtype=float)
    L = np.asarray(L_J, dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f <= 0) or np.any(~np.isfinite(L)) or np.any(L <= 0):
        raise SpecError("anharmonicity needs positive frequency and junction inductance")
    e, h = CONSTANTS.e, CONSTANTS.h
    alpha = -(2 * math.pi**2 * e**2 * L * NH / h) * (f * MHZ) ** 2 / MHZ
    return float(alpha) if alpha.ndim == 0 else alpha


def josephson_energy(L_J):
    """E_J/h in GHz: (Phi0 / 2 pi)^2 / L_J."""
    L = np.asarray(L_J, dtype=float)
    if np.any(~np.isfinite(L)) or np.any(L <= 0):
        raise SpecError("junction inductance must be positive")
    EJ = (CONSTANTS.Phi0 / (2 * math.pi)) ** 2 / (L * NH) / CONSTANTS.h / 1e9
    return float(EJ) if EJ.ndim == 0 else EJ


def charging_ratio(omega_bare, L_J) -> float:
    """E_C / E_J for a junction element of bare frequency ``omega_bare`` (MHz)."""
    EC = -anharmonicity_from_LJ(omega_bare, L_J)
    return EC / (josephson_energy(L_J) * 1e3)


def is_transmon_regime(omega_bare, L_J, limit: float = 1 / 50) -> bool:
    return charging_ratio(omega_bare, L_J) < limit


def maxwell_to_direct(maxwell, names: Sequence[str] | None = None):
    """Convert a Maxwell capacitance matrix (fF) to self and mutual capacitances.

    C_m is the row sum and C_mn the negated off-diagonal entry.  This is a
    first-order-in-coupling reading of the matrix; no network inversion.

    Returns ``(self_capacitance, couplings)``.
    """
    m = np.asarray(maxwell, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FormatError("Maxwell matrix must be square")
    n = m.shape[0]
    names = list(names) if names is not None else [f"E{i}" for i in range(n)]
    if len(names) != n:
        raise FormatError("names do not match the Maxwell matrix size")
    scale = np.max(np.abs(m)) or 1.0
    if np.max(np.abs(m - m.T)) > 1e-9 * scale:
        raise FormatError("Maxwell matrix is not symmetric")
    off = m - np.diag(np.diag(m))
    if np.any(off > 0):
        i, j = np.argwhere(off > 0)[0]
        raise FormatError(f"Maxwell off-diagonal entries must be <= 0, got {m[i, j]} at ({i},{j})")
    self_c = m.sum(axis=1)
    if np.any(self_c <= 0):
        raise FormatError("Maxwell matrix is not diagonally dominant")
    couplings = [
        CouplingSpec(names[i], names[j], C_mutual=float(-m[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
        if m[i, j] != 0
    ]
    return dict(zip(names, self_c.tolist())), couplings


def circuit_from_parameters(
    names: Sequence[str],
    omega,
    g,
    inductance,
    junction: Sequence[bool] | None = None,
    kinds: Sequence[str] | None = None,
) -> CircuitSpec:
    """Inverse design: capacitive circuit reproducing given (omega, g).

    Self capacitances follow from the bare frequencies and inductances, and
    mutual capacitances from inverting the weak-coupling g formula.
    """
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)
    L = np.asarray(inductance, dtype=float)
    n = len(names)
    junction = [True] * n if junction is None else list(junction)
    kinds = kinds or [ElementKind.TRANSMON if j else ElementKind.RESONATOR for j in junction]
    C = 1.0 / ((2 * math.pi * omega * MHZ) ** 2 * L * NH) / FF
    elements = [
        ElementSpec(names[i], C=float(C[i]), kind=kinds[i],
                    **({"L_J": float(L[i])} if junction[i] else {"L": float(L[i])}))
        for i in range(n)
    ]
    couplings = []
    for i in range(n):
        for j in range(i + 1, n):
            if g[i, j] < 0:
                raise SpecError("capacitive coupling strengths must be >= 0")
            if g[i, j] != 0:
                cm = 2 * g[i, j] * math.sqrt(C[i] * C[j]) / math.sqrt(omega[i] * omega[j])
                couplings.append(CouplingSpec(names[i], names[j], C_mutual=cm))
    return CircuitSpec(tuple(elements), tuple(couplings), CouplingKind.CAPACITIVE)
