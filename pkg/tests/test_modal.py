import numpy as np
import pytest
from _support import random_bare
from hypothesis import given, settings
from hypothesis import strategies as st

from iepr.circuit import BareParameters
from iepr.errors import FormatError, PhysicsError
from iepr.modal import NormalModeSet, TransformMatrix, assemble_H_matrix, bare_from_H, forward_synthesize


def pair(w1, w2, g):
    return BareParameters(("A", "B"), [w1, w2], [[0, g], [g, 0]])


def test_assemble_resonant_pair():
    H = assemble_H_matrix(pair(5000, 5000, 100))
    assert np.array_equal(H, [[25e6, 1e6], [1e6, 25e6]])
    assert np.count_nonzero(assemble_H_matrix(pair(5000, 6000, 0)) - np.diag([25e6, 36e6])) == 0


def test_assemble_table1_entry(table1_bare):
    H = assemble_H_matrix(table1_bare)
    assert H[0, 2] == pytest.approx(2 * 158.05 * np.sqrt(6699.371 * 8118.31), rel=1e-15)
    assert H[2, 2] == pytest.approx(8118.31**2, rel=1e-15)
    back = bare_from_H(H, table1_bare.names)
    assert np.allclose(back.g, table1_bare.g, rtol=1e-14, atol=1e-13)


def test_forward_resonant_pair():
    modes, U = forward_synthesize(pair(5000, 5000, 100))
    assert modes.omega_prime == pytest.approx([4898.98, 5099.02], abs=0.005)
    assert modes.omega_prime == pytest.approx(np.sqrt([24e6, 26e6]), rel=1e-14)
    assert np.allclose(modes.r, 0.5, atol=1e-14)
    assert np.array_equal(modes.s, [[1, -1], [1, 1]])
    assert U.residual() < 1e-14


def test_forward_uncoupled():
    modes, _ = forward_synthesize(pair(5000, 6000, 0))
    assert np.array_equal(modes.r, np.eye(2))
    assert np.array_equal(modes.s, np.ones((2, 2)))
    assert np.array_equal(modes.omega_prime, [5000, 6000])


def test_forward_detuned_pair():
    modes, _ = forward_synthesize(pair(5000, 7000, 100))
    # analytic 2x2 eigenvalues of the quadratic form
    a, b, c = 5000.0**2, 7000.0**2, 2 * 100 * np.sqrt(5000 * 7000)
    lam = (a + b) / 2 + np.array([-1, 1]) * np.sqrt(((a - b) / 2) ** 2 + c**2)
    assert modes.omega_prime == pytest.approx(np.sqrt(lam), rel=1e-14)
    assert modes.omega_prime == pytest.approx([4994.18, 7004.16], abs=0.01)
    assert modes.r[0, 0] == pytest.approx(0.9976, abs=1e-4)
    assert modes.assignment == ("A", "B")


def test_overcoupled_is_unphysical():
    with pytest.raises(PhysicsError, match="non-positive eigenvalue"):
        forward_synthesize(pair(5000, 5000, 3000))


def test_normal_mode_set_validation():
    with pytest.raises(FormatError, match=r"r out of \[0,1\] at \(0,1\)"):
        NormalModeSet(("a", "b"), [1, 2], [[0.5, 1.2], [0.5, 0.5]], np.ones((2, 2)))
    with pytest.raises(FormatError, match="sign"):
        NormalModeSet(("a", "b"), [1, 2], np.full((2, 2), 0.5), [[1, 0], [1, 1]])
    with pytest.raises(FormatError):
        NormalModeSet(("a", "b"), [1], np.full((2, 2), 0.5), None)
    with pytest.raises(FormatError):
        TransformMatrix(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_spectrum_and_double_stochasticity(n, seed):
    bare = random_bare(np.random.default_rng(seed), n, g_max=0.05)
    modes, U = forward_synthesize(bare)
    lam = np.linalg.eigvalsh(assemble_H_matrix(bare))
    assert np.allclose(np.sort(modes.omega_prime**2), lam, rtol=1e-10, atol=0)
    assert np.allclose(modes.r.sum(axis=0), 1, atol=1e-8)
    assert np.allclose(modes.r.sum(axis=1), 1, atol=1e-8)
    assert np.array_equal(modes.r, U.u**2)


def test_row_flip_leaves_r(table1_bare):
    modes, U = forward_synthesize(table1_bare)
    flipped = U.u.copy()
    flipped[2] *= -1
    assert np.array_equal(flipped**2, modes.r)
