"""Microscopic, macroscopic and general observables on multi-site systems.

An :class:`Observable` keeps its site-local structure when it has one
(``weight * sum_i embed(op_i, i)``), so norms and commutator norms of
micro/macro pairs are evaluated exactly from 2x2-sized pieces instead of
eigensolving the full dense matrix.  ``matrix`` is built lazily.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod

import numpy as np

from . import qla

HERMITIAN_TOL = 1e-10
MACRO_SLACK = 1e-9

#: +1 reads the pointer as sigma_z, -1 as -sigma_z (psi0 = (1,0) is "down").
DEFAULT_POINTER_SIGN = -1


class ClassificationError(ValueError):
    """The operator was built but does not meet the macroscopic definition.

    The demoted ``general`` observable is available as ``.observable``.
    """

    def __init__(self, message, observable):
        super().__init__(message)
        self.observable = observable


class UndefinedDeltaError(ValueError):
    pass


@dataclass(frozen=True)
class SiteSystem:
    site_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"site dimensions must be positive, got {self.site_dims}")
        object.__setattr__(self, "site_dims", dims)

    @classmethod
    def qubits(cls, n: int) -> "SiteSystem":
        return cls((2,) * n)

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def total_dim(self) -> int:
        return prod(self.site_dims)

    def check_dense(self) -> None:
        qla.check_dim(self.total_dim)

    def __add__(self, other: "SiteSystem") -> "SiteSystem":
        return SiteSystem(self.site_dims + other.site_dims)

    def embed(self, op, site: int) -> np.ndarray:
        """``1 (x) ... (x) op (x) ... (x) 1`` with ``op`` at ``site``."""
        self.check_dense()
        left = prod(self.site_dims[:site])
        right = prod(self.site_dims[site + 1:])
        out = np.kron(np.eye(left, dtype=complex), np.asarray(op, dtype=complex))
        return np.kron(out, np.eye(right, dtype=complex))


@dataclass(frozen=True, eq=False)
class Observable:
    """A bounded Hermitian operator tagged as ``micro``, ``macro`` or ``general``.

    Exactly one structural description is populated: ``terms`` (a weighted
    sum of single-site operators), ``factors`` (a tensor product over all
    sites) or ``dense`` (an explicit matrix).
    """

    kind: str
    sys: SiteSystem | None = None
    terms: tuple[tuple[int, np.ndarray], ...] = ()
    weight: float = 1.0
    factors: tuple[np.ndarray, ...] | None = None
    dense: np.ndarray | None = field(default=None, repr=False)
    site: int | None = None

    @property
    def dim(self) -> int:
        if self.dense is not None:
            return self.dense.shape[0]
        return self.sys.total_dim

    @property
    def is_local_sum(self) -> bool:
        return self.dense is None and self.factors is None

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        self.sys.check_dense()
        if self.factors is not None:
            m = qla.tensor_all(self.factors)
        else:
            m = np.zeros((self.dim, self.dim), dtype=complex)
            for site, op in self.terms:
                m += self.sys.embed(op, site)
            m *= self.weight
        m.setflags(write=False)
        return m

    @cached_property
    def norm(self) -> float:
        """Operator norm; exact from local spectra for local sums."""
        if self.is_local_sum:
            return abs(self.weight) * _local_sum_norm(
                [np.linalg.eigvalsh(op) for _, op in self.terms]
            )
        if self.factors is not None:
            return float(prod(qla.spectral_norm(f) for f in self.factors))
        return qla.spectral_norm(self.dense)

    def with_identity(self, dim: int) -> "Observable":
        """``self (x) 1_dim``, keeping kind and local structure."""
        if self.dense is not None:
            return Observable(self.kind, dense=_freeze(qla.tensor(self.dense, np.eye(dim))))
        sys = self.sys + SiteSystem((dim,))
        factors = None if self.factors is None else self.factors + (_freeze(np.eye(dim)),)
        return Observable(self.kind, sys, self.terms, self.weight, factors, site=self.site)

    def squared(self) -> "Observable":
        return general(self.matrix @ self.matrix)


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _local_sum_norm(spectra) -> float:
    # commuting Hermitian terms on distinct sites: extremes add
    if not spectra:
        return 0.0
    top = sum(float(s[-1]) for s in spectra)
    bottom = sum(float(s[0]) for s in spectra)
    return max(abs(top), abs(bottom))


def _check_local_op(op, dim: int, what: str) -> np.ndarray:
    op = _freeze(op)
    if op.shape != (dim, dim):
        raise qla.DimensionError(f"{what} has shape {op.shape}, site needs {dim}x{dim}")
    if not qla.is_hermitian(op, HERMITIAN_TOL):
        raise ValueError(f"{what} is not Hermitian")
    return op


def site_local(op, site: int, sys: SiteSystem) -> Observable:
    if not 0 <= site < sys.n_sites:
        raise IndexError(f"site {site} out of range for {sys.n_sites} sites")
    op = _check_local_op(op, sys.site_dims[site], f"operator at site {site}")
    return Observable("micro", sys, ((site, op),), 1.0, site=site)


def site_average(ops, sys: SiteSystem) -> Observable:
    """``(1/N) sum_i embed(ops[i], i)`` over all ``N`` sites of ``sys``.

    Raises :class:`ClassificationError` when some ``||Y_i|| > ||Y||``; the
    error carries the same operator tagged ``general``.
    """
    ops = list(ops)
    if len(ops) != sys.n_sites:
        raise ValueError(f"{len(ops)} operators for {sys.n_sites} sites")
    terms = tuple(
        (i, _check_local_op(op, sys.site_dims[i], f"operator at site {i}"))
        for i, op in enumerate(ops)
    )
    obs = Observable("macro", sys, terms, 1.0 / sys.n_sites)
    local_norms = [qla.spectral_norm(op) for _, op in terms]
    if max(local_norms) > obs.norm + MACRO_SLACK:
        demoted = Observable("general", sys, terms, 1.0 / sys.n_sites)
        raise ClassificationError(
            f"local norm {max(local_norms):.6g} exceeds average norm {obs.norm:.6g}",
            demoted,
        )
    return obs


def product_observable(ops, sys: SiteSystem) -> Observable:
    """Tensor product ``ops[0] (x) ops[1] (x) ...``; neither micro nor macro in general."""
    ops = list(ops)
    if len(ops) != sys.n_sites:
        raise ValueError(f"{len(ops)} factors for {sys.n_sites} sites")
    factors = tuple(
        _check_local_op(op, sys.site_dims[i], f"factor {i}") for i, op in enumerate(ops)
    )
    return Observable("general", sys, factors=factors)


def general(matrix) -> Observable:
    m = qla.as_matrix(matrix, "observable")
    if not qla.is_hermitian(m, HERMITIAN_TOL):
        raise ValueError("observable is not Hermitian")
    return Observable("general", dense=m)


def spin_pointer(sign: int = DEFAULT_POINTER_SIGN) -> np.ndarray:
    """Single-site pointer ``sign * sigma_z``."""
    if sign not in (1, -1):
        raise ValueError("pointer sign must be +1 or -1")
    return _freeze(sign * qla.PAULI_Z)


def micro_site(matrix, sys: SiteSystem, tol: float = 1e-10) -> int | None:
    """Return the site a dense operator is microscopic on, if any.

    The fingerprint: reduce to one site by partial trace, re-embed, and
    compare with the original.
    """
    m = np.asarray(matrix, dtype=complex)
    dims = sys.site_dims
    n = len(dims)
    t = m.reshape(dims + dims)
    for site in range(n):
        others = [i for i in range(n) if i != site]
        red = t
        # trace out others from the highest index down so axis numbers stay valid
        for k, i in enumerate(sorted(others, reverse=True)):
            cur_n = n - k
            red = np.trace(red, axis1=i, axis2=i + cur_n)
        red = red / prod(dims[i] for i in others)
        if np.max(np.abs(sys.embed(red, site) - m), initial=0.0) <= tol:
            return site
    return None


def site_marginal(rho, sys: SiteSystem, site: int) -> np.ndarray:
    """Reduced density matrix of one site of ``sys``."""
    left = prod(sys.site_dims[:site])
    right = prod(sys.site_dims[site + 1:])
    d = sys.site_dims[site]
    r = np.asarray(rho).reshape(left, d, right, left, d, right)
    return np.einsum("aibajb->ij", r)


def expectation(rho, a: Observable, tol: float = 1e-10) -> float:
    rho = np.asarray(rho)
    if rho.shape[0] != a.dim:
        raise qla.DimensionError(f"state of dim {rho.shape[0]}, observable of dim {a.dim}")
    if a.is_local_sum and rho.ndim == 2:
        val = a.weight * sum(qla.trace_product(site_marginal(rho, a.sys, site), op) for site, op in a.terms)
    else:
        val = qla.trace_product(rho, a.matrix)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3g}; non-Hermitian input?")
    return float(val.real)


def variance(rho, b: Observable, tol: float = 1e-10) -> float:
    rho = np.asarray(rho)
    if rho.shape[0] != b.dim:
        raise qla.DimensionError(f"state of dim {rho.shape[0]}, observable of dim {b.dim}")
    m = b.matrix
    diag = np.diagonal(m)
    if np.count_nonzero(m - np.diag(diag)) == 0:
        second = complex(np.sum(np.diagonal(rho) * diag * diag))
    else:
        second = qla.trace_product(rho @ m, m)
    first = expectation(rho, b, tol)
    var = second.real - first ** 2
    if var < 0:
        if var < -tol:
            raise ValueError(f"negative variance {var:.3g}")
        var = 0.0
    return float(var)


def expectation_vector(psi, a: Observable) -> float:
    psi = np.asarray(psi)
    return float(np.vdot(psi, a.matrix @ psi).real)


def commutator_norm(a: Observable, b: Observable) -> float:
    if a.dim != b.dim:
        raise qla.DimensionError(f"commutator of dims {a.dim} and {b.dim}")
    if a.is_local_sum and b.is_local_sum and a.sys == b.sys:
        bterms = dict(b.terms)
        spectra = []
        for site, op_a in a.terms:
            if site in bterms:
                c = 1j * qla.commutator(op_a, bterms[site])
                spectra.append(np.linalg.eigvalsh((c + qla.dagger(c)) / 2))
        return abs(a.weight * b.weight) * _local_sum_norm(spectra)
    return qla.spectral_norm(qla.commutator(a.matrix, b.matrix))


def commutator_delta(a: Observable, b: Observable) -> float:
    """Smallest ``delta`` with ``||[A, B]|| <= delta ||A|| ||B||``."""
    na, nb = a.norm, b.norm
    if na == 0 or nb == 0:
        raise UndefinedDeltaError("commutator delta undefined for a zero-norm operand")
    return commutator_norm(a, b) / (na * nb)
