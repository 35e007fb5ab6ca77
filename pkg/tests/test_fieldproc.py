import math

import numpy as np
import pytest
from _support import random_bare
from hypothesis import given, settings
from hypothesis import strategies as st

from iepr.errors import FormatError
from iepr.extract import extract_all
from iepr.fieldproc import (
    FieldExport,
    FieldSamples,
    PathSpec,
    element_inductive_energy,
    iepr_from_voltages,
    integrate_voltage,
    normal_modes_from_export,
    phenomenological_inductance,
    signs_from_voltages,
    synthesize_export,
    voltage_matrix,
)
from iepr.modal import Provenance, forward_synthesize

STRAIGHT = PathSpec("J", np.array([[0, 0, 0], [0.01, 0, 0]]))  # 10 um along x


def export_with(path, s, E):
    return FieldExport([5000.0], [1e-24], {path.element: path}, {(0, path.element): FieldSamples(s, E)})


def test_uniform_parallel_field():
    s = np.linspace(0, 0.01, 5)
    E = np.tile([1e4, 0, 0], (5, 1))
    assert integrate_voltage(export_with(STRAIGHT, s, E), 0, "J") == pytest.approx(0.1, rel=1e-14)


def test_perpendicular_field():
    s = np.linspace(0, 0.01, 5)
    E = np.tile([0, 3e4, -2e4], (5, 1))
    assert integrate_voltage(export_with(STRAIGHT, s, E), 0, "J") == 0.0


def test_linear_ramp_exact():
    s = np.array([0, 0.001, 0.0035, 0.01])  # uneven spacing
    E0 = 2e5
    E = np.column_stack([E0 * s / 0.01, np.zeros(4), np.zeros(4)])
    assert integrate_voltage(export_with(STRAIGHT, s, E), 0, "J") == pytest.approx(E0 * 1e-5 / 2, rel=1e-13)


def test_bent_path_splits_at_vertex():
    # L-shaped path; samples skip the corner, constant field along +x then +y
    path = PathSpec("J", np.array([[0, 0, 0], [0.01, 0, 0], [0.01, 0.01, 0]]))
    s = np.array([0.0, 0.02])
    E = np.array([[1e4, 1e4, 0], [1e4, 1e4, 0]])
    assert integrate_voltage(export_with(path, s, E), 0, "J") == pytest.approx(0.2, rel=1e-13)


def test_path_and_sample_validation():
    with pytest.raises(FormatError):
        PathSpec("J", np.array([[0, 0, 0]]))
    with pytest.raises(FormatError):
        PathSpec("J", np.array([[0, 0, 0], [0, 0, 0]]))
    with pytest.raises(FormatError):
        FieldSamples([0.0, 0.0], np.zeros((2, 3)))
    with pytest.raises(FormatError):
        FieldSamples([0.0], np.zeros((1, 3)))
    with pytest.raises(FormatError):
        FieldExport([5000.0], [0.0], {})
    ex = export_with(STRAIGHT, [0, 0.005], np.zeros((2, 3)))
    with pytest.raises(FormatError, match="span"):
        integrate_voltage(ex, 0, "J")
    with pytest.raises(FormatError, match="missing"):
        integrate_voltage(ex, 1, "J")


def test_inductance_recovery_single_mode():
    L, f, E = 10.0, 5000.0, 3e-24
    w = 2 * math.pi * f * 1e6
    V = math.sqrt(4 * L * 1e-9 * w**2 * E)
    assert phenomenological_inductance([[V]], [f], [E])[0] == pytest.approx(L, rel=1e-12)
    assert phenomenological_inductance([[2 * V]], [f], [E])[0] == pytest.approx(4 * L, rel=1e-12)
    with pytest.raises(FormatError, match="Q9"):
        phenomenological_inductance([[V, 0.0]], [f], [E], ["J", "Q9"])
    with pytest.raises(FormatError):
        phenomenological_inductance([[V]], [f], [0.0])


def test_element_energy():
    assert element_inductive_energy(0.0, 10.0, 5000.0) == 0.0
    e = element_inductive_energy(0.1, 10.0, 5000.0)
    assert e == pytest.approx(0.01 / (4 * 10e-9 * (2 * math.pi * 5e9) ** 2), rel=1e-14)
    assert e == pytest.approx(2.53e-19, rel=1e-3)


def test_iepr_basic():
    assert np.allclose(iepr_from_voltages([[0.3]], [5000.0], [1e-24]), 1.0)
    with pytest.raises(FormatError):
        iepr_from_voltages([[0.0, 1.0], [0.0, 1.0]], [5000, 6000], [1, 1])


def test_iepr_homogeneous():
    rng = np.random.default_rng(2)
    V = rng.normal(size=(3, 3))
    w = [4000, 5000, 6000]
    E = rng.uniform(1, 2, 3)
    assert np.allclose(iepr_from_voltages(V, w, E), iepr_from_voltages(7 * V, w, 49 * E), rtol=1e-14)


def test_signs():
    assert np.array_equal(signs_from_voltages(np.ones((2, 2))), np.ones((2, 2)))
    s = signs_from_voltages([[-1.0, 0.5], [0.0, -0.2]])
    assert np.array_equal(s, [[1, -1], [-1, 1]])


def test_resonant_pair_from_fields():
    from iepr.circuit import BareParameters

    bare = BareParameters(("A", "B"), [5000, 5000], [[0, 100], [100, 0]])
    modes, _ = forward_synthesize(bare)
    out = normal_modes_from_export(synthesize_export(modes, [10.0, 10.0]))
    assert out.provenance is Provenance.FIELD_EXPORT
    assert np.allclose(out.r, modes.r, atol=1e-6)
    assert np.array_equal(out.s, [[1, -1], [1, 1]])


def test_flipping_a_path_flips_one_sign_column():
    bare = random_bare(np.random.default_rng(5), 3, g_max=0.05)
    modes, _ = forward_synthesize(bare)
    export = synthesize_export(modes, [8.0, 9.0, 10.0])
    flipped = PathSpec("E1", export.paths["E1"].polyline[::-1])
    export.paths["E1"] = flipped
    for m in range(3):
        smp = export.samples[(m, "E1")]
        export.samples[(m, "E1")] = FieldSamples(smp.s, smp.E)
    ref = extract_all(normal_modes_from_export(synthesize_export(modes, [8.0, 9.0, 10.0])))
    got = extract_all(normal_modes_from_export(export))
    sign = np.array([1, -1, 1])
    assert np.allclose(np.abs(got.bare.g), np.abs(ref.bare.g), rtol=1e-10)
    assert np.allclose(got.bare.g, ref.bare.g * np.outer(sign, sign), rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_end_to_end_fidelity(n, seed):
    rng = np.random.default_rng(seed)
    bare = random_bare(rng, n, g_max=0.05)
    modes, _ = forward_synthesize(bare)
    L = rng.uniform(2, 20, n)
    E = rng.uniform(0.5e-24, 2e-24, n)
    export = synthesize_export(modes, L, E, n_samples=11)
    out = normal_modes_from_export(export)
    rep = extract_all(out)
    assert np.allclose(rep.bare.omega, bare.omega, rtol=1e-5)
    assert np.allclose(np.abs(rep.bare.g), np.abs(bare.g), rtol=1e-5)
    V = voltage_matrix(export)
    # quadrature error is common to a column, so it shows up in L only
    assert np.allclose(phenomenological_inductance(V, out.omega_prime, E), L, rtol=1e-2)
    # participation never exceeds the total
    assert np.all(element_inductive_energy(V, L, out.omega_prime).sum(axis=1) >= 0)


def test_second_order_convergence():
    modes, _ = forward_synthesize(random_bare(np.random.default_rng(1), 2))
    exact = None
    errs = []
    for n in (9, 17, 33, 65):
        ex = synthesize_export(modes, [10.0, 10.0], n_samples=n)
        if exact is None:
            exact = synthesize_export(modes, [10.0, 10.0], n_samples=4097)
        v = integrate_voltage(ex, 0, "E0")
        errs.append(abs(v - integrate_voltage(exact, 0, "E0")))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(np.abs(ratios - 4) < 0.2), ratios


def test_nodeless_columns_padded():
    from iepr.circuit import BareParameters

    g = np.array([[0, 16.62, 25.01], [16.62, 0, 0.5], [25.01, 0.5, 0]])
    bare = BareParameters(("q", "c1", "c2"), [5068.88, 4662.27, 5742.23], g)
    modes, _ = forward_synthesize(bare)
    export = synthesize_export(modes, [13.0, 1.0], elements=["q", "c1"])
    out = normal_modes_from_export(export, nodeless=["c2"])
    assert out.missing_columns == [2]
    # each pathed column is normalized over modes, as the full data would be
    rep = extract_all(out)
    assert np.allclose(rep.bare.g, g, rtol=1e-6)
    with pytest.raises(FormatError):
        normal_modes_from_export(export, nodeless=["q", "c2"])
