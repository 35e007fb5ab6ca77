import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LJ_for_alpha
from iepr.circuit import BareParameters, attach_anharmonicity
from iepr.errors import LabelWarning, OracleError, ResourceError, SpecError
from iepr.modal import assemble_H_matrix
from iepr.oracle import (
    FockConfig,
    FockSpectrum,
    build_fock_hamiltonian,
    convergence_check,
    labeled_spectrum,
    oracle_parameters,
    run_oracle,
)


def single(w, a=0.0):
    return BareParameters(("a",), [w], [[0.0]], [a], [1.0 if a else 0.0])


def pair(w1, w2, g, a1=0.0, a2=0.0):
    return BareParameters(("a", "b"), [w1, w2], [[0, g], [g, 0]], [a1, a2],
                          [1.0 if a1 else 0.0, 1.0 if a2 else 0.0])


def test_single_linear_mode():
    H = build_fock_hamiltonian(single(5000.0), FockConfig(levels_per_mode=3, convergence_levels=4))
    assert np.allclose(H, np.diag([0.0, 5000.0, 10000.0]), rtol=1e-15, atol=0)


def test_single_transmon_ladder():
    H = build_fock_hamiltonian(single(5000.0, -250.0))
    w_nl = 4750.0
    assert np.allclose(np.diag(H)[:4], [0, w_nl, 2 * w_nl - 250, 3 * w_nl - 750])
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_coupling_matrix_elements():
    cfg = FockConfig(levels_per_mode=3, convergence_levels=4)
    H = build_fock_hamiltonian(pair(5000, 6000, 100), cfg)
    idx = lambda i, j: 3 * i + j  # noqa: E731
    # -g (a^+ - a)(b^+ - b): exchange terms +g, pair creation -g, with sqrt(n) factors
    assert H[idx(1, 0), idx(0, 1)] == pytest.approx(100)
    assert H[idx(0, 0), idx(1, 1)] == pytest.approx(-100)
    assert H[idx(2, 0), idx(1, 1)] == pytest.approx(100 * np.sqrt(2))
    assert H[idx(1, 2), idx(0, 1)] == pytest.approx(-100 * np.sqrt(2))
    assert np.array_equal(H, H.T)


def test_linear_spectrum_matches_quadratic_form():
    bare = BareParameters(("a", "b", "c"), [5000, 6000, 7000],
                          [[0, 80, -60], [80, 0, 120], [-60, 120, 0]])
    params, _ = run_oracle(bare, FockConfig(levels_per_mode=7, convergence_levels=8))
    lam = np.sqrt(np.linalg.eigvalsh(assemble_H_matrix(bare)))
    assert np.allclose(np.sort(params.omega_prime_nl), lam, rtol=1e-9)
    assert np.allclose(params.chi, 0, atol=1e-6)


def test_linear_pair_has_no_kerr():
    params, _ = run_oracle(pair(5000, 7000, 100))
    assert np.allclose(params.chi, 0, atol=1e-9)
    assert np.allclose(params.alpha_prime, 0, atol=1e-9)


def test_uncoupled_transmon_exact():
    params, spec = run_oracle(pair(5000, 7000, 0, a1=-250))
    assert params.alpha_prime[0] == pytest.approx(-250, abs=1e-9)
    assert params.chi[0, 1] == pytest.approx(0, abs=1e-9)
    assert np.allclose(spec.overlaps, 1)
    assert spec.energy((0, 0)) == 0.0


def test_dispersive_labels_confident():
    params, spec = run_oracle(pair(5000, 7000, 100, a1=-250))
    assert np.all(spec.overlaps > 0.99)
    assert not spec.ambiguous


def test_hybridized_labels_warn():
    # resonant with w_nl = 4750: single-excitation states are 50/50 mixtures
    with pytest.warns(LabelWarning):
        _, spec = run_oracle(pair(5000, 4750, 90, a1=-250))
    assert (0, 1) in spec.ambiguous and len(spec.ambiguous[(0, 1)]) == 2


def test_label_gap_threshold_is_configurable():
    # g/Delta = 0.9: amplitudes 0.86 and 0.50, ambiguous only under a looser threshold
    bare = pair(5000, 4850, 90, a1=-250)
    with warnings.catch_warnings():
        warnings.simplefilter("error", LabelWarning)
        run_oracle(bare)
    with pytest.warns(LabelWarning):
        run_oracle(bare, FockConfig(label_gap=0.4))


def test_missing_label():
    spec = FockSpectrum(("a",), [(0,)], np.array([0.0]), np.array([1.0]))
    with pytest.raises(OracleError):
        oracle_parameters(spec)


def test_resource_caps():
    bare = BareParameters(tuple("abcd"), [5000] * 4, np.zeros((4, 4)))
    with pytest.raises(ResourceError):
        build_fock_hamiltonian(bare)
    with pytest.raises(ResourceError):
        build_fock_hamiltonian(bare.__class__(tuple("abc"), [5000] * 3, np.zeros((3, 3))),
                               FockConfig(levels_per_mode=17, convergence_levels=18))


def test_config_validation():
    with pytest.raises(SpecError):
        FockConfig(levels_per_mode=2)
    with pytest.raises(SpecError):
        FockConfig(levels_per_mode=8, convergence_levels=8)


def test_convergence_weak_and_linear(dispersive_bare):
    rep = convergence_check(dispersive_bare)
    assert rep.passed
    assert all(v < 1e-3 for v in rep.shifts.values())
    lin = convergence_check(pair(5000, 7000, 100))
    assert all(v == 0 for v in lin.shifts.values())


def test_convergence_flags_strong_anharmonicity():
    # E_C / E_J = 1/10 at 5000 MHz
    LJ = LJ_for_alpha(5000.0, -559.0)
    bare = attach_anharmonicity(BareParameters(("q", "r"), [5000, 7000], [[0, 100], [100, 0]], None, [LJ, 0]))
    rep = convergence_check(bare)
    assert rep.charging_ratios["q"] == pytest.approx(0.1, rel=1e-3)
    assert not rep.passed


@pytest.mark.parametrize("levels", [6, 8])
def test_coupling_sign_gauge(levels):
    cfg = FockConfig(levels_per_mode=levels, convergence_levels=levels + 1)
    a = build_fock_hamiltonian(pair(5000, 7000, 100, a1=-250), cfg)
    b = build_fock_hamiltonian(pair(5000, 7000, -100, a1=-250), cfg)
    assert np.allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b), atol=1e-8)


def test_small_coupling_is_quadratic():
    base, _ = run_oracle(pair(5000, 7000, 0, a1=-250))
    shifts = []
    for g in (5.0, 10.0):
        p, _ = run_oracle(pair(5000, 7000, g, a1=-250))
        shifts.append(p.omega_prime_nl[0] - base.omega_prime_nl[0])
    assert shifts[1] / shifts[0] == pytest.approx(4, rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.floats(4000, 8000), st.floats(-400, -50), st.floats(0, 60))
def test_hermitian_real_spectrum(w, a, g):
    H = build_fock_hamiltonian(pair(w, w + 1500, g, a1=a))
    assert np.array_equal(H, H.T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LabelWarning)
        spec = labeled_spectrum(H)
    assert spec.energy((0, 0)) == 0.0
