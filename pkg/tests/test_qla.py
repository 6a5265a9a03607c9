import numpy as np
import pytest
from hypothesis import given, strategies as st

from infotransfer import qla
from infotransfer.qla import PAULI_X, PAULI_Y, PAULI_Z
from infotransfer.states import random_density

I2 = np.eye(2)
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 5)


def test_tensor_identities():
    assert np.array_equal(qla.tensor(I2, I2), np.eye(4))
    assert np.array_equal(qla.tensor(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))


def test_tensor_index_map_is_ancilla_major():
    m = qla.tensor(PAULI_X, PAULI_Z)
    # row (i,k) = (0,1) -> 1, column (j,l) = (1,1) -> 3: x[0,1] * z[1,1]
    assert m[1, 3] == -1
    # (0,3) pairs x[0,1] with z[0,1]
    assert m[0, 3] == 0
    expected = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
    assert np.array_equal(m, expected)


def test_tensor_respects_dimension_cap():
    old = qla.set_dim_cap(8)
    try:
        qla.tensor(np.eye(2), np.eye(4))
        with pytest.raises(qla.DimensionLimitError):
            qla.tensor(np.eye(4), np.eye(4))
    finally:
        qla.set_dim_cap(old)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(qla.DimensionError):
        qla.as_matrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        qla.as_matrix(np.array([[np.nan, 0], [0, 1]]))


def test_partial_trace_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(qla.partial_trace_ancilla(np.outer(bell, bell.conj()), 2, 2), I2 / 2, atol=1e-15)


def test_partial_trace_identity():
    assert np.allclose(qla.partial_trace_ancilla(np.eye(4), 2, 2), 2 * I2)


def test_partial_trace_dimension_error_names_dims():
    with pytest.raises(qla.DimensionError, match="6"):
        qla.partial_trace_ancilla(np.eye(4), 2, 3)


def test_partial_trace_system_keeps_ancilla():
    tau = np.diag([0.25, 0.75])
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(qla.partial_trace_system(qla.tensor(tau, rho), 2, 2), tau)


def test_spectral_norm_examples():
    assert qla.spectral_norm(PAULI_X) == pytest.approx(1.0, abs=1e-12)
    assert qla.spectral_norm(qla.commutator(PAULI_X, PAULI_Z)) == pytest.approx(2.0, abs=1e-12)
    assert qla.spectral_norm(np.zeros((3, 3))) == 0.0


def test_commutator_examples():
    a = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(qla.commutator(np.eye(2), a), np.zeros((2, 2)))
    assert np.allclose(qla.commutator(PAULI_X, PAULI_Z), -2j * PAULI_Y)
    assert np.array_equal(qla.commutator(np.diag([1, 2]), np.diag([3, 4])), np.zeros((2, 2)))
    with pytest.raises(qla.DimensionError):
        qla.commutator(np.eye(2), np.eye(3))


def test_structural_predicates():
    assert qla.is_unitary(np.eye(3), 1e-10)
    assert qla.is_hermitian(PAULI_Y, 1e-10)
    assert not qla.is_unitary(np.diag([1, 2]), 1e-10)
    assert not qla.is_hermitian(np.array([[0, 1], [0, 0]]), 1e-10)
    assert qla.is_projection(np.diag([1, 0, 1]))
    assert not qla.is_projection(np.diag([1, 0.5]))


def test_random_unitary_is_unitary(rng):
    for d in (1, 2, 5, 16):
        assert qla.is_unitary(qla.random_unitary(d, rng), 1e-10)


def test_random_hermitian_norm(rng):
    h = qla.random_hermitian(4, rng, norm=1.0)
    assert qla.is_hermitian(h)
    assert qla.spectral_norm(h) == pytest.approx(1.0, abs=1e-12)


def _mat(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


@given(seeds, dims, dims, dims)
def test_tensor_associative(seed, d1, d2, d3):
    rng = np.random.default_rng(seed)
    a, b, c = _mat(rng, d1), _mat(rng, d2), _mat(rng, d3)
    left = qla.tensor(qla.tensor(a, b), c)
    right = qla.tensor(a, qla.tensor(b, c))
    assert np.max(np.abs(left - right)) <= 1e-12


@given(seeds, dims, dims)
def test_partial_trace_of_product(seed, dk, dh):
    rng = np.random.default_rng(seed)
    tau, rho = random_density(dk, rng), random_density(dh, rng)
    assert np.max(np.abs(qla.partial_trace_ancilla(qla.tensor(tau, rho), dk, dh) - rho)) <= 1e-12


@given(seeds, dims, dims)
def test_partial_trace_preserves_trace(seed, dk, dh):
    m = _mat(np.random.default_rng(seed), dk * dh)
    assert abs(np.trace(qla.partial_trace_ancilla(m, dk, dh)) - np.trace(m)) <= 1e-12 * max(1, abs(np.trace(m)))


@given(seeds, dims)
def test_spectral_norm_unitarily_invariant(seed, d):
    rng = np.random.default_rng(seed)
    a, u = _mat(rng, d), qla.random_unitary(d, rng)
    assert abs(qla.spectral_norm(u @ a @ qla.dagger(u)) - qla.spectral_norm(a)) <= 1e-9


@given(seeds, dims)
def test_spectral_norm_submultiplicative(seed, d):
    rng = np.random.default_rng(seed)
    a, b = _mat(rng, d), _mat(rng, d)
    assert qla.spectral_norm(a @ b) <= qla.spectral_norm(a) * qla.spectral_norm(b) + 1e-9


@given(seeds, dims)
def test_spectral_norm_matches_svd(seed, d):
    a = _mat(np.random.default_rng(seed), d)
    top = np.linalg.svd(a, compute_uv=False)[0]
    assert qla.spectral_norm(a) == pytest.approx(top, rel=1e-10)
