"""Pure states, density matrices, mixtures and purification.

States are plain numpy arrays: a pure state is a unit vector, a density
matrix a Hermitian, positive semidefinite, unit-trace square array.  The
``as_*`` helpers validate and return read-only copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qla

STATE_TOL = 1e-10
PURIFY_CUTOFF = 1e-12


class InvalidStateError(ValueError):
    pass


class NormalizationError(InvalidStateError):
    pass


def as_pure(psi, tol: float = STATE_TOL) -> np.ndarray:
    v = np.array(psi, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidStateError("pure state needs finite amplitudes")
    norm2 = float(np.vdot(v, v).real)
    if abs(norm2 - 1.0) > tol:
        raise NormalizationError(f"state has squared norm {norm2!r}, expected 1")
    v.setflags(write=False)
    return v


def as_density(rho, tol: float = STATE_TOL) -> np.ndarray:
    m = qla.as_matrix(rho, "density matrix")
    anti = m - qla.dagger(m)
    # Frobenius bounds the spectral norm from above; only pay for the
    # eigensolver when the cheap bound is inconclusive.
    herm_err = np.linalg.norm(anti) / 2
    if herm_err > tol:
        herm_err = qla.spectral_norm(anti) / 2
    if herm_err > tol:
        raise InvalidStateError(f"density matrix is not Hermitian (error {herm_err:.3g})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise NormalizationError(f"density matrix has trace {tr!r}, expected 1")
    lo = np.linalg.eigvalsh((m + qla.dagger(m)) / 2)[0]
    if lo < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3g}")
    return m


def density_from_pure(psi) -> np.ndarray:
    v = as_pure(psi)
    m = np.outer(v, np.conj(v))
    m.setflags(write=False)
    return m


def basis_state(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    v.setflags(write=False)
    return v


def mixture(weights, states) -> np.ndarray:
    """Convex combination ``sum_i w_i rho_i`` of density matrices."""
    weights = [float(w) for w in weights]
    states = list(states)
    if len(weights) != len(states) or not states:
        raise ValueError(f"{len(weights)} weights for {len(states)} states")
    if any(w < 0 for w in weights):
        raise ValueError("mixture weights must be nonnegative")
    if abs(sum(weights) - 1.0) > STATE_TOL:
        raise NormalizationError(f"mixture weights sum to {sum(weights)!r}")
    mats = [np.asarray(s, dtype=complex) for s in states]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise qla.DimensionError("mixture of states with different dimensions")
    out = sum(w * m for w, m in zip(weights, mats))
    return as_density(out)


@dataclass(frozen=True)
class SuperpositionSpec:
    """Coefficients of ``alpha0 * psi0 + alpha1 * psi1``."""

    alpha0: complex
    alpha1: complex

    def __post_init__(self):
        total = abs(self.alpha0) ** 2 + abs(self.alpha1) ** 2
        if abs(total - 1.0) > STATE_TOL:
            raise NormalizationError(f"|alpha0|^2 + |alpha1|^2 = {total!r}")

    @property
    def weights(self) -> tuple[float, float]:
        return abs(self.alpha0) ** 2, abs(self.alpha1) ** 2

    def superpose(self, psi0, psi1) -> np.ndarray:
        return as_pure(self.alpha0 * np.asarray(psi0) + self.alpha1 * np.asarray(psi1))

    def collapsed(self, psi0, psi1) -> np.ndarray:
        """The incoherent mixture ``|a0|^2 P(psi0) + |a1|^2 P(psi1)``."""
        w0, w1 = self.weights
        return mixture([w0, w1], [density_from_pure(psi0), density_from_pure(psi1)])

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SuperpositionSpec":
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= np.linalg.norm(z)
        return cls(complex(z[0]), complex(z[1]))


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return as_pure(z / np.linalg.norm(z))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """``G G^dagger / tr(G G^dagger)`` with ``G`` complex Gaussian of shape (dim, rank)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ qla.dagger(g)
    m = m / np.trace(m).real
    return as_density((m + qla.dagger(m)) / 2)


def random_orthonormal_pair(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = qla.random_unitary(dim, rng)
    return as_pure(u[:, 0]), as_pure(u[:, 1])


def purify(tau) -> tuple[np.ndarray, int]:
    """Represent a mixed state as a vector on ``C^aux (x) C^dim``.

    With ``tau = sum_i p_i |phi_i><phi_i|`` the vector is the direct sum of
    the branches ``sqrt(p_i) phi_i``, branch index outermost.  Eigenvalues
    below ``PURIFY_CUTOFF`` are dropped.
    """
    tau = as_density(tau)
    vals, vecs = np.linalg.eigh(tau)
    keep = vals > PURIFY_CUTOFF
    vals, vecs = vals[keep][::-1], vecs[:, keep][:, ::-1]
    branches = np.sqrt(vals)[:, None] * vecs.T
    phi = branches.reshape(-1)
    return as_pure(phi / np.linalg.norm(phi)), int(vals.size)


def trace_distance(rho, sigma) -> float:
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise qla.DimensionError(f"trace distance of {rho.shape} and {sigma.shape}")
    return 0.5 * float(np.sum(np.linalg.svd(rho - sigma, compute_uv=False)))
