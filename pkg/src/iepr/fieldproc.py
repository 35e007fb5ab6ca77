"""Postprocessing of eigenmode field exports into participation data.

The export format is solver-agnostic: for every (mode, element path) pair
the tangential field is pre-sampled along a declared polyline.  Voltages
V_mn come from trapezoidal line integrals, the per-element inductive energy
from E_mn = V_mn^2 / (4 L_n w'_m^2), and participations are column
normalized over modes, which also yields the phenomenological L_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from .constants import MHZ, MM, NH
from .errors import FormatError
from .modal import NormalModeSet, Provenance


@dataclass(frozen=True)
class PathSpec:
    element: str
    polyline: np.ndarray  # (k, 3) points in mm
    orientation_note: str = ""

    def __post_init__(self):
        pts = np.asarray(self.polyline, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise FormatError(f"path for {self.element!r} needs at least two 3D points")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg == 0):
            raise FormatError(f"path for {self.element!r} has zero-length segments")
        object.__setattr__(self, "polyline", pts)

    @property
    def vertex_arclength(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.polyline, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.vertex_arclength[-1])

    def tangents(self) -> np.ndarray:
        d = np.diff(self.polyline, axis=0)
        return d / np.linalg.norm(d, axis=1)[:, None]


@dataclass(frozen=True)
class FieldSamples:
    s: np.ndarray  # arclength, mm
    E: np.ndarray  # (k, 3) field, V/m

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        E = np.asarray(self.E, dtype=float)
        if s.ndim != 1 or len(s) < 2:
            raise FormatError("need at least two field samples per path")
        if E.shape != (len(s), 3):
            raise FormatError("field samples must be 3-vectors, one per arclength")
        if np.any(np.diff(s) <= 0):
            raise FormatError("sample arclengths must be strictly increasing")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "E", E)


@dataclass
class FieldExport:
    freq_MHz: np.ndarray
    total_energy_J: np.ndarray
    paths: dict[str, PathSpec]
    samples: dict[tuple[int, str], FieldSamples] = field(default_factory=dict)

    def __post_init__(self):
        self.freq_MHz = np.asarray(self.freq_MHz, dtype=float)
        self.total_energy_J = np.asarray(self.total_energy_J, dtype=float)
        if self.freq_MHz.shape != self.total_energy_J.shape:
            raise FormatError("each mode needs a frequency and a total inductive energy")
        if np.any(self.freq_MHz <= 0):
            raise FormatError("mode frequencies must be positive")
        if np.any(self.total_energy_J <= 0):
            raise FormatError("total inductive energies must be positive")

    @property
    def n_modes(self) -> int:
        return len(self.freq_MHz)

    @property
    def elements(self) -> list[str]:
        return list(self.paths)


def _line_integral(path: PathSpec, smp: FieldSamples) -> float:
    """Trapezoidal integral of E . t ds, split at polyline vertices."""
    verts = path.vertex_arclength
    tol = 1e-9 * max(path.length, 1.0)
    if smp.s[0] > tol or smp.s[-1] < path.length - tol or smp.s[0] < -tol or smp.s[-1] > path.length + tol:
        raise FormatError(
            f"samples for {path.element!r} must span the path from 0 to {path.length} mm"
        )
    # insert interpolated samples at interior vertices so each segment integrates on its own
    s_all = np.union1d(smp.s, verts[1:-1])
    E_all = np.column_stack([np.interp(s_all, smp.s, smp.E[:, i]) for i in range(3)])
    tang = path.tangents()
    total = 0.0
    for k in range(len(tang)):
        lo, hi = verts[k], verts[k + 1]
        sel = (s_all >= lo - tol) & (s_all <= hi + tol)
        f = E_all[sel] @ tang[k]
        total += trapezoid(f, s_all[sel] * MM)
    return float(total)


def integrate_voltage(export: FieldExport, mode: int, element: str) -> float:
    """Peak voltage V = integral of E_m . dl along the element path (V)."""
    if element not in export.paths:
        raise FormatError(f"no integration path declared for {element!r}")
    smp = export.samples.get((mode, element))
    if smp is None:
        raise FormatError(f"missing field samples for mode {mode}, element {element!r}")
    return _line_integral(export.paths[element], smp)


def voltage_matrix(export: FieldExport, elements: Sequence[str] | None = None) -> np.ndarray:
    elements = export.elements if elements is None else list(elements)
    V = np.empty((export.n_modes, len(elements)))
    for m in range(export.n_modes):
        for j, name in enumerate(elements):
            V[m, j] = integrate_voltage(export, m, name)
    return V


def _weights(V, omega_prime, total_energy):
    V = np.asarray(V, dtype=float)
    w = 2 * math.pi * np.asarray(omega_prime, dtype=float) * MHZ
    E = np.asarray(total_energy, dtype=float)
    if np.any(E <= 0):
        raise FormatError("total inductive energy must be positive for every mode")
    return V**2 / (w**2 * E)[:, None]


def phenomenological_inductance(V, omega_prime, total_energy, names: Sequence[str] = ()) -> np.ndarray:
    """L_n = sum_m (V_mn^2 / w'_m^2) / (4 E_m), in nH."""
    L = _weights(V, omega_prime, total_energy).sum(axis=0) / 4 / NH
    zero = np.flatnonzero(L <= 0)
    if len(zero):
        k = zero[0]
        who = names[k] if len(names) > k else f"column {k}"
        raise FormatError(f"element {who} has zero voltage in every mode; its inductance is undefined")
    return L


def element_inductive_energy(V, L_n, omega_prime) -> np.ndarray:
    """Average inductive energy V^2 / (4 L w'^2) in J (L in nH, w' in MHz)."""
    V = np.asarray(V, dtype=float)
    L = np.asarray(L_n, dtype=float) * NH
    w = 2 * math.pi * np.asarray(omega_prime, dtype=float) * MHZ
    if V.ndim == 2:
        return V**2 / (4 * L[None, :] * (w**2)[:, None])
    return V**2 / (4 * L * w**2)


def iepr_from_voltages(V, omega_prime, total_energy, names: Sequence[str] = ()) -> np.ndarray:
    """Participation matrix r_mn, each column normalized over modes."""
    W = _weights(V, omega_prime, total_energy)
    col = W.sum(axis=0)
    zero = np.flatnonzero(col <= 0)
    if len(zero):
        k = zero[0]
        who = names[k] if len(names) > k else f"column {k}"
        raise FormatError(f"element {who} has zero voltage in every mode")
    return W / col


def signs_from_voltages(V) -> np.ndarray:
    """sign(V) with zeros as +1, then each row flipped so its largest |V| is positive."""
    V = np.asarray(V, dtype=float)
    s = np.where(V < 0, -1.0, 1.0)
    for m in range(V.shape[0]):
        k = np.argmax(np.abs(V[m]))
        if V[m, k] < 0:
            s[m] *= -1
    return s


def normal_modes_from_export(export: FieldExport, nodeless: Sequence[str] = ()) -> NormalModeSet:
    """Participation data for all pathed elements plus NaN columns for node-less ones.

    Element order: pathed elements in export order, then ``nodeless``.
    """
    names = export.elements
    overlap = set(names) & set(nodeless)
    if overlap:
        raise FormatError(f"elements {sorted(overlap)} have paths but were declared node-less")
    V = voltage_matrix(export, names)
    r = iepr_from_voltages(V, export.freq_MHz, export.total_energy_J, names)
    s = signs_from_voltages(V)
    n_extra = len(nodeless)
    if len(names) + n_extra != export.n_modes:
        raise FormatError(
            f"{export.n_modes} modes but {len(names) + n_extra} elements; "
            "the mode set must be complete"
        )
    pad = np.full((export.n_modes, n_extra), np.nan)
    return NormalModeSet(
        tuple(names) + tuple(nodeless),
        export.freq_MHz,
        np.hstack([r, pad]),
        np.hstack([s, pad]),
        Provenance.FIELD_EXPORT,
    )


def synthesize_export(
    modes: NormalModeSet,
    inductance: Sequence[float],
    total_energy: Sequence[float] | None = None,
    elements: Sequence[str] | None = None,
    n_samples: int = 21,
    paths: dict[str, PathSpec] | None = None,
    profile: str = "sine",
) -> FieldExport:
    """Field export consistent with a known normal-mode set.

    Voltages are V_mn = s_mn sqrt(4 L_n w'_m^2 r_mn E_m); the field along
    each (default straight, 10 um) path has a smooth profile whose integral
    reproduces V_mn.  Used as a stand-in for an EM solver in tests.
    """
    elements = list(modes.names if elements is None else elements)
    idx = [modes.names.index(e) for e in elements]
    L = np.asarray(inductance, dtype=float)
    E = np.ones(modes.n) * 1e-24 if total_energy is None else np.asarray(total_energy, dtype=float)
    w = 2 * math.pi * modes.omega_prime * MHZ
    r = modes.r[:, idx]
    s = modes.s[:, idx]
    V = s * np.sqrt(4 * L[None, :] * NH * (w**2)[:, None] * r * E[:, None])
    if paths is None:
        paths = {
            name: PathSpec(name, np.array([[0.0, 0.0, 0.0], [0.01, 0.0, 0.0]]) + [0.0, 0.1 * j, 0.0])
            for j, name in enumerate(elements)
        }
    samples = {}
    for j, name in enumerate(elements):
        path = paths[name]
        length = path.length
        s_mm = np.linspace(0.0, length, n_samples)
        shape = _profile(s_mm / length, profile)
        # exact integral of the profile over [0, 1] scaled by the path length in m
        norm = _profile_integral(profile) * length * MM
        tang = path.tangents()
        seg = np.clip(np.searchsorted(path.vertex_arclength, s_mm, side="right") - 1, 0, len(tang) - 1)
        for m in range(modes.n):
            amp = V[m, j] / norm
            samples[(m, name)] = FieldSamples(s_mm, (amp * shape)[:, None] * tang[seg])
    return FieldExport(modes.omega_prime.copy(), E, paths, samples)


def _profile(x, kind):
    if kind == "sine":
        return np.sin(np.pi * x) + 0.5
    if kind == "uniform":
        return np.ones_like(x)
    raise ValueError(f"unknown profile {kind!r}")


def _profile_integral(kind):
    return {"sine": 2 / np.pi + 0.5, "uniform": 1.0}[kind]
