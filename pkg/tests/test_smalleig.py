import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vortexlab.smalleig import EigenConvergenceError, gen_eig, sym_eig

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_identity():
    s = sym_eig(np.eye(3))
    assert np.allclose(s.eigenvalues, 1.0)
    assert np.allclose(s.eigenvectors.T @ s.eigenvectors, np.eye(3), atol=1e-14)


def test_rotated_diagonal():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    r = np.array([[c, -s], [s, c]])
    a = r @ np.diag([2.0, -1.0]) @ r.T
    assert np.allclose(sym_eig(a).eigenvalues, [-1.0, 2.0], atol=1e-14)


def test_ring_block_determinant():
    # ring-with-centre block for N=4, lambda=1: xi = 5, a_N = 4 sqrt 2
    a_n = 4 * math.sqrt(2)
    a = np.array([[6.0, 0.0, a_n], [0.0, 14.0, a_n], [a_n, a_n, 2 * 5.0]])
    n, lam = 4, 1.0
    det = -n**3 * lam * (lam + (n - 1) / 2) * (lam - (n - 1) ** 2 / 4)
    assert det == 200.0
    assert abs(np.prod(sym_eig(a).eigenvalues) - det) < 1e-10 * det


def test_rejects_asymmetric_and_nonfinite():
    with pytest.raises(ValueError):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        gen_eig([[np.nan, 0.0], [0.0, 1.0]])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)))
def test_symmetric_trace_and_eigenpairs(m):
    a = m + m.T
    s = sym_eig(a)
    w, v = s.eigenvalues, s.eigenvectors
    scale = max(1.0, np.linalg.norm(a))
    assert np.all(np.diff(w) >= -1e-12 * scale)
    assert abs(w.sum() - np.trace(a)) < 1e-10 * scale
    assert np.allclose(a @ v, v * w, atol=1e-10 * scale)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * scale)


def test_rotation_generator():
    g = gen_eig([[0.0, -1.0], [1.0, 0.0]])
    assert np.allclose(sorted(g.eigenvalues, key=lambda z: z.imag), [-1j, 1j], atol=1e-14)
    assert g.semisimple_flag


def test_jordan_block():
    g = gen_eig([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(g.eigenvalues, 0.0)
    assert not g.semisimple_flag


def test_repeated_semisimple_eigenvalue():
    g = gen_eig(np.diag([2.0, 2.0, -1.0]))
    assert g.semisimple_flag
    assert np.allclose(sorted(g.eigenvalues.real), [-1, 2, 2])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)))
def test_general_trace_det_and_conjugate_pairs(a):
    ev = gen_eig(a).eigenvalues
    scale = max(1.0, np.linalg.norm(a))
    n = a.shape[0]
    assert abs(ev.sum() - np.trace(a)) < 1e-9 * scale
    assert abs(np.prod(ev) - np.linalg.det(a)) < 1e-8 * scale**n
    assert np.allclose(np.sort_complex(ev), np.sort_complex(ev.conj()), atol=1e-8 * scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda k: arrays(np.float64, (2 * k, 2 * k), elements=finite)))
def test_hamiltonian_spectrum_is_four_fold_symmetric(m):
    k = m.shape[0] // 2
    j = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
    a = j @ (m + m.T)
    ev = gen_eig(a).eigenvalues
    scale = max(1.0, np.linalg.norm(a))
    # for every eigenvalue z, -z is also present (defective clusters spread as sqrt(eps))
    for z in ev:
        assert np.min(np.abs(ev + z)) < 1e-5 * scale


def test_convergence_error_carries_partial():
    err = EigenConvergenceError("x", np.array([1.0]))
    assert err.partial[0] == 1.0
