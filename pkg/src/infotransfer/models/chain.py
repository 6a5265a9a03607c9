"""Finite spin chain read out by a single flying spin.

The system qubit passes over ``n`` chain spins and flips spin ``i`` at
step ``i`` when it is in ``psi1``.  Sites are ordered chain first, system
last, so composite indices are ``chain_bits * 2 + system_bit``.

Two backends: ``dense`` builds the transfer as matrices (``n <= 12`` and
subject to the dense cap); ``statevector`` keeps the global pure state as
a ``2**(n+1)`` amplitude vector and applies the flips by axis reversal.
A thermal (mixed) chain is run on the statevector backend through its
purification, which doubles the chain register.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import qla
from ..observables import (
    DEFAULT_POINTER_SIGN,
    Observable,
    SiteSystem,
    product_observable,
    site_average,
    site_local,
    spin_pointer,
)
from ..states import SuperpositionSpec, as_pure, purify
from ..transfer import PointerStats, TransferMap, check_orthogonal
from .qubits import P0, controlled_flips

DENSE_MAX_SITES = 12
STATEVECTOR_MAX_QUBITS = 21


@dataclass(frozen=True)
class ChainConfig:
    n: int
    beta: float | None = None
    backend: str = "dense"
    pointer_sign: int = DEFAULT_POINTER_SIGN

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"chain needs at least one site, got n={self.n}")
        if self.backend == "dense":
            if self.n > DENSE_MAX_SITES:
                raise ValueError(f"dense backend supports n <= {DENSE_MAX_SITES}, got {self.n}")
        elif self.backend == "statevector":
            # a mixed chain is purified, doubling the register
            qubits = self.n + 1 if self.beta is None else 2 * self.n + 1
            if qubits > STATEVECTOR_MAX_QUBITS:
                raise ValueError(f"statevector backend limited to {STATEVECTOR_MAX_QUBITS} qubits, need {qubits}")
        else:
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def sys(self) -> SiteSystem:
        """Chain sites followed by the system site."""
        return SiteSystem.qubits(self.n + 1)


def epsilon(beta: float) -> float:
    """Thermal polarization ``(e^-b - e^b) / (e^b + e^-b) = -tanh(b)``."""
    return float(-np.tanh(beta))


def gibbs_qubit(beta: float, pointer_sign: int = DEFAULT_POINTER_SIGN) -> np.ndarray:
    """``exp(-beta p) / Z`` for the single-site pointer ``p``; mean of ``p`` is ``epsilon(beta)``."""
    energies = np.real(np.diag(spin_pointer(pointer_sign)))
    w = np.exp(-beta * energies - np.max(-beta * energies))
    return np.diag(w / w.sum()).astype(complex)


def thermal_closed_form(n: int, beta: float) -> dict:
    """Pointer statistics of the thermal chain before and after the flip."""
    eps = epsilon(beta)
    var = (1.0 - eps ** 2) / n
    return {"b0": eps, "b1": -eps, "variance": var, "sigma": float(np.sqrt(var))}


def chain_pointer(cfg: ChainConfig) -> Observable:
    """Average spin of the chain, tensored with the identity on the system."""
    chain = SiteSystem.qubits(cfg.n)
    return site_average([spin_pointer(cfg.pointer_sign)] * cfg.n, chain).with_identity(2)


def _chain_state(cfg: ChainConfig) -> np.ndarray:
    if cfg.beta is None:
        return qla.tensor_all([P0] * cfg.n)
    return qla.tensor_all([gibbs_qubit(cfg.beta, cfg.pointer_sign)] * cfg.n)


def _build(cfg: ChainConfig, step: int | None):
    step = cfg.n if step is None else step
    if not 0 <= step <= cfg.n:
        raise ValueError(f"step must lie in 0..{cfg.n}, got {step}")
    pointer = chain_pointer(cfg)
    if cfg.backend == "statevector":
        if cfg.beta is None:
            phi, aux = np.zeros(2 ** cfg.n, dtype=complex), 1
            phi[0] = 1.0
        else:
            phi, aux = purify(_chain_state(cfg))
        return ChainStatevector(cfg.n, phi, aux, step), pointer
    qla.check_dim(2 ** (cfg.n + 1))
    u = controlled_flips(cfg.n, range(step))
    return TransferMap(u, _chain_state(cfg), 2 ** cfg.n, 2), pointer


def hepp_chain(cfg: ChainConfig, step: int | None = None):
    """Chain initially all ``psi0``; after ``step`` flips (default ``n``)."""
    if cfg.beta is not None:
        raise ValueError("hepp_chain uses the all-psi0 chain; use thermal_chain for finite beta")
    return _build(cfg, step)


def thermal_chain(cfg: ChainConfig, step: int | None = None):
    """Chain in the product Gibbs state of ``H = sum_i p_i`` at inverse temperature ``beta``."""
    if cfg.beta is None or not np.isfinite(cfg.beta):
        raise ValueError("thermal_chain needs a finite beta")
    return _build(cfg, step)


def stray_observable(n: int) -> Observable:
    """``sigma_x`` on every chain site and on the system."""
    return product_observable([qla.PAULI_X] * (n + 1), SiteSystem.qubits(n + 1))


class ChainStatevector:
    """Statevector form of the chain transfer.

    The register is ``aux (x) chain (x) system``; ``aux`` is the branch
    index of the purified chain state (size 1 for a pure chain).
    Observables act on ``chain (x) system`` and as the identity on ``aux``.
    """

    def __init__(self, n: int, phi, aux: int, step: int):
        self.n = n
        self.aux = aux
        self.step = step
        self.phi = as_pure(phi)
        if self.phi.size != aux * 2 ** n:
            raise qla.DimensionError(f"ancilla vector has size {self.phi.size}, expected {aux * 2 ** n}")
        self.dimK = 2 ** n
        self.dimH = 2

    @property
    def dim(self) -> int:
        return 2 ** (self.n + 1)

    @property
    def _shape(self) -> tuple[int, ...]:
        return (self.aux,) + (2,) * (self.n + 1)

    def evolve(self, psi) -> np.ndarray:
        """``(1 (x) U)(phi (x) psi)`` as an array of shape ``(aux, 2, ..., 2)``."""
        psi = as_pure(psi)
        v = np.kron(self.phi, psi).reshape(self._shape)
        flipped = np.flip(v[..., 1], axis=tuple(range(1, 1 + self.step)))
        out = v.copy()
        out[..., 1] = flipped
        return out

    def apply(self, a: Observable, v: np.ndarray) -> np.ndarray:
        if a.dim != self.dim:
            raise qla.DimensionError(f"observable has dim {a.dim}, chain composite dim is {self.dim}")
        if a.factors is not None:
            out = v
            for site, op in enumerate(a.factors):
                out = _apply_site(op, site + 1, out)
            return out
        if a.dense is not None:
            flat = v.reshape(self.aux, -1)
            return (flat @ a.dense.T).reshape(v.shape)
        out = np.zeros_like(v)
        for site, op in a.terms:
            out += _apply_site(op, site + 1, v)
        return a.weight * out

    def expectation(self, v: np.ndarray, a: Observable) -> float:
        if a.is_local_sum and a.dim == self.dim:
            total = sum(_site_expectation(op, site + 1, v) for site, op in a.terms)
            return float(a.weight * total)
        return float(np.vdot(v, self.apply(a, v)).real)

    def moments(self, v: np.ndarray, b: Observable) -> tuple[float, float]:
        bv = self.apply(b, v)
        mean = float(np.vdot(v, bv).real)
        var = float(np.vdot(bv, bv).real) - mean ** 2
        return mean, max(var, 0.0)

    def pointer_stats(self, b: Observable, psi0, psi1) -> PointerStats:
        check_orthogonal(as_pure(psi0), as_pure(psi1))
        m0, v0 = self.moments(self.evolve(psi0), b)
        m1, v1 = self.moments(self.evolve(psi1), b)
        return PointerStats(m0, m1, float(np.sqrt(v0)), float(np.sqrt(v1)))

    def evolve_superposition(self, psi0, psi1, spec: SuperpositionSpec) -> "EvolvedVectors":
        psi0, psi1 = as_pure(psi0), as_pure(psi1)
        check_orthogonal(psi0, psi1)
        return EvolvedVectors(
            self, self.evolve(psi0), self.evolve(psi1), self.evolve(spec.superpose(psi0, psi1)), spec.weights
        )

    def density(self, psi) -> np.ndarray:
        """Dense ``T(|psi><psi|)`` on ``chain (x) system`` (small ``n`` only)."""
        v = self.evolve(psi).reshape(self.aux, -1)
        qla.check_dim(v.shape[1])
        return v.T @ v.conj()


@dataclass(frozen=True, eq=False)
class EvolvedVectors:
    backend: ChainStatevector
    branch0: np.ndarray
    branch1: np.ndarray
    coherent: np.ndarray
    weights: tuple[float, float]

    def discrepancy(self, a: Observable) -> float:
        sv = self.backend
        w0, w1 = self.weights
        mixed = w0 * sv.expectation(self.branch0, a) + w1 * sv.expectation(self.branch1, a)
        return abs(sv.expectation(self.coherent, a) - mixed)

    def pointer_stats(self, b: Observable) -> PointerStats:
        m0, v0 = self.backend.moments(self.branch0, b)
        m1, v1 = self.backend.moments(self.branch1, b)
        return PointerStats(m0, m1, float(np.sqrt(v0)), float(np.sqrt(v1)))


def _site_view(v: np.ndarray, axis: int) -> np.ndarray:
    # (before, site, after) view of a C-contiguous register
    v = np.ascontiguousarray(v)
    return v.reshape(int(np.prod(v.shape[:axis])), v.shape[axis], -1)


def _apply_site(op: np.ndarray, axis: int, v: np.ndarray) -> np.ndarray:
    w = _site_view(v, axis)
    out = np.zeros_like(w)
    for i in range(op.shape[0]):
        for j in range(op.shape[1]):
            if op[i, j] != 0:
                out[:, i, :] += op[i, j] * w[:, j, :]
    return out.reshape(v.shape)


def _site_expectation(op: np.ndarray, axis: int, v: np.ndarray) -> float:
    """``<v| op_axis |v>`` from the Gram matrix of the site slices."""
    w = _site_view(v, axis)
    total = 0.0
    for i in range(op.shape[0]):
        for j in range(op.shape[1]):
            if op[i, j] != 0:
                total += op[i, j] * np.vdot(w[:, i, :], w[:, j, :])
    return float(np.real(total))


def pauli_observables(n: int, include_system: bool = True):
    """Single-site Paulis on every site and their site averages.

    Yields ``(label, observable)``.  Macro averages are taken over the
    chain (``n`` sites, system untouched) and over all ``n + 1`` sites.
    """
    sys = SiteSystem.qubits(n + 1)
    sites = range(n + 1) if include_system else range(n)
    for name, pauli in qla.PAULIS.items():
        for site in sites:
            yield f"micro:{name}@{site}", site_local(pauli, site, sys)
        chain_avg = site_average([pauli] * n, SiteSystem.qubits(n)).with_identity(2)
        yield f"macro:{name}@chain", chain_avg
        yield f"macro:{name}@all", site_average([pauli] * (n + 1), sys)


def random_local_observable(rng: np.random.Generator, n: int, kind: str) -> Observable:
    """Random unit-norm micro or macro observable on ``chain (x) system``.

    Macro observables average local terms sharing one random spectrum
    (each rotated by its own random unitary), so ``||Y_i|| = ||Y||``.
    """
    sys = SiteSystem.qubits(n + 1)
    if kind == "micro":
        return site_local(qla.random_hermitian(2, rng, norm=1.0), int(rng.integers(0, n + 1)), sys)
    if kind != "macro":
        raise ValueError(f"kind must be 'micro' or 'macro', got {kind!r}")
    spectrum = np.diag([rng.choice([-1.0, 1.0]), rng.uniform(-1.0, 1.0)])
    ops = []
    for _ in range(n + 1):
        v = qla.random_unitary(2, rng)
        op = v @ spectrum @ qla.dagger(v)
        ops.append((op + qla.dagger(op)) / 2)
    return site_average(ops, sys)
