"""Subsystem reduction, coupler sweeps and normal-mode-splitting extraction."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .circuit import BareParameters, CircuitSpec, build_bare
from .errors import PhysicsError, SearchError, SpecError
from .extract import extract_all
from .jacobi import check_symmetric, sym_eig
from .modal import assemble_H_matrix, bare_from_H, forward_synthesize

TIE_TOL = 1e-6


@dataclass
class ReductionResult:
    """Residual block after deflating the modes of the eliminated elements.

    ``eliminated`` maps each removed element to the normal frequency (MHz)
    of the mode absorbed with it.  ``step_residuals`` holds the relative
    spectrum-preservation error after every deflation.
    """

    kept: tuple[str, ...]
    eliminated: dict[str, float]
    effective: BareParameters
    H_reduced: np.ndarray
    step_residuals: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def spectrum_residual(self) -> float:
        return max(self.step_residuals, default=0.0)

    def g_eff(self, a: str | None = None, b: str | None = None) -> float:
        if a is None:
            if len(self.kept) != 2:
                raise SpecError("name the pair when more than two elements are kept")
            a, b = self.kept
        return float(self.effective.g[self.kept.index(a), self.kept.index(b)])


def _spectrum_residual(ref, parts):
    got = np.sort(np.concatenate(parts))
    ref = np.sort(ref)
    return float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))


def _householder(v, c):
    """Reflector P with P v = -e_c that moves every other basis vector as little as possible."""
    n = len(v)
    w = v.copy()
    w[c] += 1.0
    w /= np.linalg.norm(w)
    return np.eye(n) - 2.0 * np.outer(w, w)


def reduce_subsystem(H, names: Sequence[str], eliminate: Sequence[str], L_J=None, alpha=None) -> ReductionResult:
    """Partially diagonalize the quadratic form, removing ``eliminate`` one by one.

    At each step the normal mode with the largest participation on the
    element is split off with a Householder reflector.  The reflector built
    from e_c + v keeps the remaining basis vectors as close as possible to
    the original bare elements, so the residual block stays interpretable
    as bare frequencies and effective couplings.  ``L_J`` and ``alpha`` of
    the kept elements are carried over unchanged.
    """
    H = check_symmetric(H)
    names = list(names)
    if H.shape != (len(names), len(names)):
        raise SpecError("matrix size does not match the element names")
    eliminate = list(eliminate)
    unknown = [e for e in eliminate if e not in names]
    if unknown:
        raise SpecError(f"cannot eliminate unknown elements {unknown}")
    if len(set(eliminate)) != len(eliminate):
        raise SpecError("elements to eliminate must be distinct")
    if len(eliminate) >= len(names):
        raise SpecError("at least one element must be kept")

    ref = np.linalg.eigvalsh(H)
    current = list(names)
    block = H.copy()
    absorbed = {}
    absorbed_lam = []
    residuals = []
    notes = []
    for name in eliminate:
        c = current.index(name)
        lam, u = sym_eig(block)
        r = u[:, c] ** 2
        order = np.argsort(-r, kind="stable")
        m = order[0]
        if len(r) > 1 and r[order[0]] - r[order[1]] < TIE_TOL:
            m = min(order[:2])  # modes are ascending, so the lower index is lower frequency
            msg = (f"eliminating {name}: two modes share its maximal participation "
                   f"({r[order[0]]:.6f}); choosing the lower-frequency one")
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            notes.append(msg)
        v = u[m].copy()
        if v[c] < 0:
            v = -v
        P = _householder(v, c)
        rotated = P @ block @ P
        keep = [k for k in range(len(current)) if k != c]
        block = rotated[np.ix_(keep, keep)]
        block = 0.5 * (block + block.T)
        absorbed[name] = float(np.sqrt(lam[m]))
        absorbed_lam.append(lam[m])
        current.pop(c)
        residuals.append(_spectrum_residual(ref, [np.array(absorbed_lam), np.linalg.eigvalsh(block)]))

    idx = [names.index(k) for k in current]
    LJ = None if L_J is None else np.asarray(L_J, dtype=float)[idx]
    effective = bare_from_H(block, current, LJ)
    if alpha is not None:
        effective = replace(effective, alpha=np.asarray(alpha, dtype=float)[idx])
    return ReductionResult(tuple(current), absorbed, effective, block, residuals, notes)


@dataclass
class SweepResult:
    parameter: str
    grid: np.ndarray
    values: np.ndarray
    flags: list[str]
    zero_crossings: list[float]
    pair: tuple[str, str] = ("", "")

    def rows(self):
        return [(float(x), float(v), f) for x, v, f in zip(self.grid, self.values, self.flags)]


def _g_eff_at(template: CircuitSpec, coupler: str, value: float, pair) -> float:
    circuit = template.with_inductance(coupler, value)
    bare = build_bare(circuit, nonlinear=False)
    modes, _ = forward_synthesize(bare)
    report = extract_all(modes, nonlinear=False)
    eliminate = [n for n in report.bare.names if n not in pair]
    red = reduce_subsystem(assemble_H_matrix(report.bare), report.bare.names, eliminate)
    return red.g_eff(*pair)


def _bracket_root(f, x0, x1, g0, g1):
    """Linear interpolation, then one bisection-style refinement of the bracket."""
    xm = x0 - g0 * (x1 - x0) / (g1 - g0)
    gm = f(xm)
    if gm == 0 or not np.isfinite(gm):
        return float(xm)
    if np.sign(gm) == np.sign(g0):
        x0, g0 = xm, gm
    else:
        x1, g1 = xm, gm
    return float(x0 - g0 * (x1 - x0) / (g1 - g0))


def effective_coupling_sweep(
    template: CircuitSpec,
    coupler: str,
    grid: Sequence[float],
    pair: tuple[str, str] | None = None,
) -> SweepResult:
    """Effective coupling between two elements as the coupler inductance varies.

    Every grid point runs the whole chain: circuit -> bare parameters ->
    synthetic normal modes -> extraction -> reduction to ``pair``.
    Unphysical points are flagged and skipped.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise SpecError("sweep grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise SpecError("sweep grid must be strictly increasing")
    el = template.element(coupler)
    if not el.is_junction:
        raise SpecError(f"coupler {coupler!r} has no junction inductance to sweep")
    if pair is None:
        pair = tuple(n for n in template.names if n != coupler)
        if len(pair) != 2:
            raise SpecError("name the element pair for circuits with more than three elements")
    pair = tuple(pair)
    for p in pair:
        template.index(p)

    values = np.full(len(grid), np.nan)
    flags = []
    for i, x in enumerate(grid):
        try:
            values[i] = _g_eff_at(template, coupler, x, pair)
            flags.append("ok")
        except PhysicsError:
            flags.append("unphysical")

    def f(x):
        try:
            return _g_eff_at(template, coupler, x, pair)
        except PhysicsError:
            return np.nan

    crossings = []
    ok = np.flatnonzero(np.isfinite(values))
    for a, b in zip(ok[:-1], ok[1:]):
        ga, gb = values[a], values[b]
        if ga == 0:
            crossings.append(float(grid[a]))
        elif np.sign(ga) != np.sign(gb) and gb != 0:
            crossings.append(_bracket_root(f, grid[a], grid[b], ga, gb))
    if len(ok) and values[ok[-1]] == 0:
        crossings.append(float(grid[ok[-1]]))
    return SweepResult(f"L_{coupler}_nH", grid, values, flags, crossings, pair)


def nms_resonant_g(omega_pair) -> float:
    """Half the normal-mode splitting at the avoided crossing."""
    a, b = np.asarray(omega_pair, dtype=float).reshape(2)
    return abs(a - b) / 2


def _pair_modes(circuit: CircuitSpec, tuned: str, partner: str):
    """Normal frequencies of the two modes carrying the tuned/partner pair."""
    bare = build_bare(circuit, nonlinear=False)
    modes, _ = forward_synthesize(bare)
    i, j = circuit.index(tuned), circuit.index(partner)
    weight = modes.r[:, i] + modes.r[:, j]
    top = np.sort(np.argsort(-weight, kind="stable")[:2])
    wt = modes.omega_prime[top]
    # order as (tuned-like, partner-like)
    if modes.r[top[0], i] < modes.r[top[1], i]:
        wt = wt[::-1]
    return wt


@dataclass
class NMSResult:
    g: float
    g_resonant: float
    L_resonant: float
    omega_resonant: float
    omega_operating: tuple[float, float]
    gap_min: float


def nms_extract(
    template: CircuitSpec,
    tuned: str,
    partner: str,
    bounds: tuple[float, float],
    operating: float | None = None,
    xtol: float = 1e-6,
) -> NMSResult:
    """Coupling from the avoided crossing of ``tuned`` with ``partner``.

    The junction inductance of ``tuned`` is scanned over ``bounds`` (nH) for
    the minimum gap, g_res is half of it, and the result is rescaled to the
    operating point with g ~ sqrt(w1 w2), evaluated on the two mode
    frequencies at the operating point and at resonance.
    """
    el = template.element(tuned)
    template.index(partner)
    if not el.is_junction:
        raise SpecError(f"{tuned!r} has no junction inductance to tune")
    lo, hi = map(float, bounds)
    if not 0 < lo < hi:
        raise SpecError("bounds must satisfy 0 < low < high")
    operating = el.L_J if operating is None else float(operating)

    def gap(L):
        try:
            w = _pair_modes(template.with_inductance(tuned, L), tuned, partner)
        except PhysicsError:
            return np.inf
        return abs(w[0] - w[1])

    res = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                          options={"xatol": xtol * (hi - lo)})
    L_res = float(res.x)
    edge = 1e-3 * (hi - lo)
    if not np.isfinite(res.fun) or L_res - lo < edge or hi - L_res < edge:
        raise SearchError(
            f"no interior gap minimum for {tuned}-{partner} in [{lo}, {hi}] nH "
            f"(best at {L_res:.6g} nH); widen the interval"
        )
    # a gap at an interval edge that is smaller than the interior minimum means no crossing
    if min(gap(lo), gap(hi)) < res.fun:
        raise SearchError(f"gap for {tuned}-{partner} is not minimized inside [{lo}, {hi}] nH")
    w_res = _pair_modes(template.with_inductance(tuned, L_res), tuned, partner)
    g_res = nms_resonant_g(w_res)
    omega_res = float(np.sqrt(w_res[0] * w_res[1]))
    w_op = _pair_modes(template.with_inductance(tuned, operating), tuned, partner)
    g = g_res * np.sqrt(w_op[0] * w_op[1]) / omega_res
    return NMSResult(float(g), g_res, L_res, omega_res, (float(w_op[0]), float(w_op[1])), float(res.fun))
