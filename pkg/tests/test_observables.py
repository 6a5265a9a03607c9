import numpy as np
import pytest
from hypothesis import given, strategies as st

from infotransfer import qla
from infotransfer.models import epsilon, gibbs_qubit
from infotransfer.observables import (
    ClassificationError,
    SiteSystem,
    UndefinedDeltaError,
    commutator_delta,
    commutator_norm,
    expectation,
    expectation_vector,
    general,
    micro_site,
    product_observable,
    site_average,
    site_local,
    site_marginal,
    spin_pointer,
    variance,
)
from infotransfer.qla import PAULI_X, PAULI_Y, PAULI_Z
from infotransfer.states import density_from_pure, random_density

I2 = np.eye(2)
seeds = st.integers(0, 2**32 - 1)


def test_site_local_embeds_with_identities():
    sys = SiteSystem.qubits(2)
    assert np.array_equal(site_local(PAULI_Z, 0, sys).matrix, np.kron(PAULI_Z, I2))
    a = site_local(PAULI_X, 1, sys)
    assert np.array_equal(a.matrix, np.kron(I2, PAULI_X))
    assert a.kind == "micro" and a.site == 1


def test_site_local_preserves_norm(rng):
    op = qla.random_hermitian(3, rng)
    a = site_local(op, 1, SiteSystem((2, 3, 2)))
    assert a.norm == pytest.approx(qla.spectral_norm(op), rel=1e-12)
    assert qla.spectral_norm(a.matrix) == pytest.approx(qla.spectral_norm(op), rel=1e-10)


def test_site_local_errors():
    sys = SiteSystem.qubits(2)
    with pytest.raises(IndexError):
        site_local(PAULI_Z, 2, sys)
    with pytest.raises(ValueError):
        site_local(np.array([[0, 1], [0, 0]]), 0, sys)
    with pytest.raises(qla.DimensionError):
        site_local(np.eye(3), 0, sys)


def test_site_average_two_qubits():
    b = site_average([PAULI_Z, PAULI_Z], SiteSystem.qubits(2))
    assert np.allclose(b.matrix, (np.kron(PAULI_Z, I2) + np.kron(I2, PAULI_Z)) / 2)
    assert b.kind == "macro"
    assert b.norm == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_site_average_is_mean_spin(n):
    b = site_average([PAULI_Z] * n, SiteSystem.qubits(n))
    # diagonal entry for basis index k is the mean of (+1 for bit 0, -1 for bit 1)
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[::-1]) & 1
    assert np.allclose(np.diagonal(b.matrix), np.mean(1 - 2 * bits, axis=1))


def test_site_average_zero_ops():
    b = site_average([np.zeros((2, 2))] * 3, SiteSystem.qubits(3))
    assert b.norm == 0.0
    assert not np.any(b.matrix)


def test_site_average_demotes_unbalanced_terms():
    # (sz (x) 1) / 2 has norm 1/2, below the norm of its sz term
    with pytest.raises(ClassificationError) as err:
        site_average([PAULI_Z, np.zeros((2, 2))], SiteSystem.qubits(2))
    demoted = err.value.observable
    assert demoted.kind == "general"
    assert np.allclose(demoted.matrix, np.kron(PAULI_Z, I2) / 2)
    # opposite signs still reach norm 1, so this one is macroscopic
    assert site_average([PAULI_Z, -PAULI_Z], SiteSystem.qubits(2)).kind == "macro"


def test_site_average_count_mismatch():
    with pytest.raises(ValueError):
        site_average([PAULI_Z], SiteSystem.qubits(2))


def test_expectation_examples():
    sz = general(PAULI_Z)
    assert expectation(np.diag([1, 0]), sz) == pytest.approx(1.0)
    assert expectation(I2 / 2, sz) == pytest.approx(0.0)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert expectation(density_from_pure(plus), general(PAULI_X)) == pytest.approx(1.0)
    assert expectation_vector(plus, general(PAULI_X)) == pytest.approx(1.0)


def test_expectation_dimension_mismatch():
    with pytest.raises(qla.DimensionError):
        expectation(np.eye(4) / 4, general(PAULI_Z))


def test_variance_examples():
    assert variance(np.diag([1, 0]), general(PAULI_Z)) == pytest.approx(0.0, abs=1e-15)
    assert variance(I2 / 2, general(PAULI_Z)) == pytest.approx(1.0)
    assert variance(I2 / 2, general(PAULI_X)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_variance_of_thermal_product_state(n, beta):
    rho = qla.tensor_all([gibbs_qubit(beta)] * n)
    b = site_average([spin_pointer()] * n, SiteSystem.qubits(n))
    eps = epsilon(beta)
    assert expectation(rho, b) == pytest.approx(eps, abs=1e-12)
    assert variance(rho, b) == pytest.approx((1 - eps**2) / n, abs=1e-12)


def test_spin_pointer_convention():
    assert np.array_equal(spin_pointer(), np.diag([-1, 1]))
    assert np.array_equal(spin_pointer(1), PAULI_Z)
    with pytest.raises(ValueError):
        spin_pointer(0)


def test_commutator_delta_examples():
    assert commutator_delta(general(PAULI_Z), general(np.diag([2, 3]))) == 0.0
    assert commutator_delta(general(PAULI_X), general(PAULI_Z)) == pytest.approx(2.0)
    with pytest.raises(UndefinedDeltaError):
        commutator_delta(general(np.zeros((2, 2))), general(PAULI_Z))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_micro_against_macro_pointer_is_two_over_n(n):
    sys = SiteSystem.qubits(n)
    b = site_average([PAULI_Z] * n, sys)
    a = site_local(PAULI_X, 0, sys)
    # ||[x, z]|| / n = 2 / n exactly
    assert commutator_delta(a, b) == pytest.approx(2 / n, rel=1e-12)


def test_micro_site_fingerprint(rng):
    sys = SiteSystem((2, 3, 2))
    op = qla.random_hermitian(3, rng)
    assert micro_site(site_local(op, 1, sys).matrix, sys) == 1
    assert micro_site(product_observable([PAULI_X, np.eye(3), PAULI_X], sys).matrix, sys) is None


def test_product_observable_norm_and_matrix():
    sys = SiteSystem.qubits(3)
    p = product_observable([PAULI_X] * 3, sys)
    assert p.kind == "general"
    assert np.array_equal(p.matrix, np.kron(np.kron(PAULI_X, PAULI_X), PAULI_X))
    assert p.norm == pytest.approx(1.0)


def test_with_identity_keeps_structure():
    b = site_average([PAULI_Z] * 2, SiteSystem.qubits(2)).with_identity(2)
    assert b.kind == "macro" and b.is_local_sum and b.dim == 8
    assert np.allclose(b.matrix, np.kron((np.kron(PAULI_Z, I2) + np.kron(I2, PAULI_Z)) / 2, I2))


def test_site_marginal_matches_partial_trace(rng):
    sys = SiteSystem((2, 3))
    rho = random_density(6, rng)
    assert np.allclose(site_marginal(rho, sys, 1), qla.partial_trace_ancilla(rho, 2, 3))
    assert np.allclose(site_marginal(rho, sys, 0), qla.partial_trace_system(rho, 2, 3))


def _random_macro(rng, n, spectrum):
    ops = []
    for _ in range(n):
        u = qla.random_unitary(2, rng)
        ops.append(u @ np.diag(spectrum) @ qla.dagger(u))
    return site_average(ops, SiteSystem.qubits(n))


@given(seeds, st.integers(1, 6), st.data())
def test_micro_macro_delta_bound(seed, n, data):
    rng = np.random.default_rng(seed)
    site = data.draw(st.integers(0, n - 1))
    a = site_local(qla.random_hermitian(2, rng, norm=1.0), site, SiteSystem.qubits(n))
    b = _random_macro(rng, n, [1.0, rng.uniform(-1, 1)])
    assert commutator_delta(a, b) <= 2 / n + 1e-9


@given(seeds, st.integers(1, 5))
def test_macro_macro_delta_bound(seed, n):
    # A averages over the N pointer sites plus the system site, as in the estimate
    rng = np.random.default_rng(seed)
    a = _random_macro(rng, n + 1, [1.0, rng.uniform(-1, 1)])
    b = _random_macro(rng, n, [1.0, rng.uniform(-1, 1)]).with_identity(2)
    assert commutator_delta(a, b) <= 2 / n + 1e-9


@given(seeds, st.integers(1, 4))
def test_structured_norms_match_dense(seed, n):
    rng = np.random.default_rng(seed)
    sys = SiteSystem.qubits(n)
    a = site_local(qla.random_hermitian(2, rng), int(rng.integers(n)), sys)
    terms = [qla.random_hermitian(2, rng) for _ in range(n)]
    try:
        b = site_average(terms, sys)
    except ClassificationError as err:
        b = err.observable
    for obs in (a, b):
        assert obs.norm == pytest.approx(qla.spectral_norm(obs.matrix), rel=1e-9, abs=1e-12)
    dense = qla.spectral_norm(qla.commutator(a.matrix, b.matrix))
    assert commutator_norm(a, b) == pytest.approx(dense, rel=1e-9, abs=1e-12)


@given(seeds, st.integers(1, 4))
def test_structured_expectation_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    sys = SiteSystem.qubits(n)
    b = _random_macro(rng, n, [1.0, -0.5])
    rho = random_density(2**n, rng)
    assert expectation(rho, b) == pytest.approx(np.trace(rho @ b.matrix).real, abs=1e-12)


@given(seeds, st.integers(1, 4))
def test_expectation_linear_in_observable(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng)
    a, b = qla.random_hermitian(d, rng), qla.random_hermitian(d, rng)
    s, t = rng.uniform(-2, 2, size=2)
    combined = expectation(rho, general(s * a + t * b))
    assert combined == pytest.approx(s * expectation(rho, general(a)) + t * expectation(rho, general(b)), abs=1e-12)


@given(seeds, st.integers(1, 5))
def test_variance_nonnegative(seed, d):
    rng = np.random.default_rng(seed)
    assert variance(random_density(d, rng), general(qla.random_hermitian(d, rng))) >= 0.0


@given(seeds, st.integers(3, 5))
def test_variance_zero_iff_single_eigenspace(seed, d):
    rng = np.random.default_rng(seed)
    u = qla.random_unitary(d, rng)
    spectrum = np.array([1.0] * 2 + list(np.linspace(-1, 0.5, d - 2)))
    b = general(u @ np.diag(spectrum) @ qla.dagger(u))
    # state supported on the two-dimensional eigenvalue-1 eigenspace
    c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi = u[:, :2] @ (c / np.linalg.norm(c))
    assert variance(density_from_pure(psi), b) <= 1e-10
    # mixing in another eigenvector gives positive variance
    rho = 0.5 * density_from_pure(psi) + 0.5 * density_from_pure(u[:, 2])
    assert variance(rho, b) > 1e-6
