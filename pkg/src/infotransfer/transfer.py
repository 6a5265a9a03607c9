"""Information transfer maps, the coherence bound, and pointer instruments.

A transfer couples an open system ``H`` to an ancilla ``K`` prepared in
``tau`` through a unitary ``U`` on ``K (x) H``::

    T(rho) = U (tau (x) rho) U^dagger

If some pointer ``B`` separates the images of two orthogonal states
``psi0``, ``psi1`` (means ``b0 != b1``, spreads ``sigma0``, ``sigma1``),
then no observable ``A`` that nearly commutes with ``B`` can tell the
superposition ``a0 psi0 + a1 psi1`` from the mixture
``|a0|^2 psi0 + |a1|^2 psi1``::

    |tr T(psi) A - tr T(mix) A| <= (delta ||B|| + sigma0 + sigma1) / |b0 - b1| * ||A||

with ``||[A, B]|| <= delta ||A|| ||B||``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import qla
from .observables import Observable, commutator_delta, expectation, general, variance
from .states import (
    STATE_TOL,
    SuperpositionSpec,
    as_density,
    as_pure,
    density_from_pure,
    purify,
    random_density,
    random_orthonormal_pair,
    random_pure,
)

ORTHO_TOL = 1e-10
DEGENERATE_GAP = 1e-12
NULL_EVENT = 1e-12


class DegeneratePointerError(ValueError):
    """The pointer means coincide, so the bound's hypothesis fails."""


class HypothesisError(ValueError):
    """One or more preconditions of the bound do not hold."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trial ``index`` of a sweep rooted at ``seed``.

    Counter-based: the stream depends only on ``(seed, index)``, so trials
    can run in any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


@dataclass(frozen=True, eq=False)
class TransferMap:
    u: np.ndarray
    tau: np.ndarray
    dimK: int
    dimH: int

    def __post_init__(self):
        u = qla.as_matrix(self.u, "transfer unitary")
        if u.shape[0] != self.dimK * self.dimH:
            raise qla.DimensionError(
                f"unitary has dim {u.shape[0]}, expected {self.dimK}*{self.dimH}"
            )
        if not qla.is_unitary(u, 1e-10):
            raise ValueError("transfer operator is not unitary")
        tau = as_density(self.tau)
        if tau.shape[0] != self.dimK:
            raise qla.DimensionError(f"ancilla state has dim {tau.shape[0]}, expected {self.dimK}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "tau", tau)

    @property
    def dim(self) -> int:
        return self.dimK * self.dimH

    def conjugate(self, x) -> np.ndarray:
        """Linear extension ``X -> U (tau (x) X) U^dagger`` for any square ``X`` on ``H``."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dimH, self.dimH):
            raise qla.DimensionError(f"input has shape {x.shape}, system dim is {self.dimH}")
        return self.u @ qla.tensor(self.tau, x) @ qla.dagger(self.u)


def apply_transfer(t: TransferMap, rho) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (t.dimH, t.dimH):
        raise qla.DimensionError(f"state has shape {rho.shape}, system dim is {t.dimH}")
    out = t.conjugate(as_density(rho))
    out.setflags(write=False)
    return out


def reduced_state(t: TransferMap, rho) -> np.ndarray:
    """``tr_K T(rho)``, the open system after the interaction."""
    return qla.partial_trace_ancilla(apply_transfer(t, rho), t.dimK, t.dimH)


@dataclass(frozen=True)
class PointerStats:
    b0: float
    b1: float
    sigma0: float
    sigma1: float

    def __post_init__(self):
        if self.sigma0 < 0 or self.sigma1 < 0:
            raise ValueError("pointer spreads must be nonnegative")

    @property
    def gap(self) -> float:
        return abs(self.b0 - self.b1)


def check_orthogonal(psi0, psi1) -> None:
    overlap = abs(np.vdot(psi0, psi1))
    if overlap > ORTHO_TOL:
        raise HypothesisError([f"psi0 and psi1 are not orthogonal (overlap {overlap:.3g})"])


def stats_from_states(rho0, rho1, b: Observable) -> PointerStats:
    return PointerStats(
        expectation(rho0, b),
        expectation(rho1, b),
        float(np.sqrt(variance(rho0, b))),
        float(np.sqrt(variance(rho1, b))),
    )


def pointer_stats(t, b: Observable, psi0, psi1) -> PointerStats:
    psi0, psi1 = as_pure(psi0), as_pure(psi1)
    check_orthogonal(psi0, psi1)
    if b.dim != t.dim:
        raise qla.DimensionError(f"pointer has dim {b.dim}, composite dim is {t.dim}")
    if not isinstance(t, TransferMap):
        return t.pointer_stats(b, psi0, psi1)
    return stats_from_states(
        apply_transfer(t, density_from_pure(psi0)),
        apply_transfer(t, density_from_pure(psi1)),
        b,
    )


def coherence_bound(delta, normB, sigma0, sigma1, b0, b1, normA) -> float:
    """``(delta ||B|| + sigma0 + sigma1) / |b0 - b1| * ||A||``."""
    gap = abs(b0 - b1)
    if gap <= DEGENERATE_GAP:
        raise DegeneratePointerError(f"pointer means coincide (|b0 - b1| = {gap:.3g})")
    return (delta * normB + sigma0 + sigma1) / gap * normA


@dataclass(frozen=True, eq=False)
class EvolvedStates:
    """Images under ``T`` of both branches, the superposition and the mixture."""

    branch0: np.ndarray
    branch1: np.ndarray
    coherent: np.ndarray
    collapsed: np.ndarray

    def discrepancy(self, a: Observable) -> float:
        return abs(expectation(self.coherent, a) - expectation(self.collapsed, a))

    def pointer_stats(self, b: Observable) -> PointerStats:
        return stats_from_states(self.branch0, self.branch1, b)


def evolve_superposition(t, psi0, psi1, spec: SuperpositionSpec):
    """Transfer images needed by the bound.

    ``t`` is a :class:`TransferMap` or any backend exposing its own
    ``evolve_superposition(psi0, psi1, spec)`` (e.g. a statevector chain).
    """
    if not isinstance(t, TransferMap):
        return t.evolve_superposition(psi0, psi1, spec)
    psi0, psi1 = as_pure(psi0), as_pure(psi1)
    check_orthogonal(psi0, psi1)
    if psi0.size != t.dimH:
        raise qla.DimensionError(f"states have dim {psi0.size}, system dim is {t.dimH}")
    r0 = apply_transfer(t, density_from_pure(psi0))
    r1 = apply_transfer(t, density_from_pure(psi1))
    coherent = apply_transfer(t, density_from_pure(spec.superpose(psi0, psi1)))
    w0, w1 = spec.weights
    # T is linear, so T(mixture) is the same mixture of branch images
    return EvolvedStates(r0, r1, coherent, w0 * r0 + w1 * r1)


def decoherence_discrepancy(t, psi0, psi1, spec: SuperpositionSpec, a: Observable) -> float:
    """``|tr T(psi) A - tr T(|a0|^2 psi0 + |a1|^2 psi1) A|``."""
    if a.dim != t.dim:
        raise qla.DimensionError(f"observable has dim {a.dim}, composite dim is {t.dim}")
    return evolve_superposition(t, psi0, psi1, spec).discrepancy(a)


@dataclass(frozen=True)
class VerificationRecord:
    """One check: passes when ``lhs <= rhs + tol``.

    The bound ingredients are ``None`` for checks that are not an instance
    of the coherence bound (e.g. a closed-form identity).
    """

    scenario: str
    params: dict
    lhs: float
    rhs: float
    delta: float | None = None
    normA: float | None = None
    normB: float | None = None
    b0: float | None = None
    b1: float | None = None
    sigma0: float | None = None
    sigma1: float | None = None
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.tol)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "params": dict(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "delta": self.delta,
            "normA": self.normA,
            "normB": self.normB,
            "b0": self.b0,
            "b1": self.b1,
            "sigma0": self.sigma0,
            "sigma1": self.sigma1,
            "pass": self.passed,
            "tol": self.tol,
        }


def _hypothesis_violations(t, b: Observable, a: Observable, psi0, psi1) -> list[str]:
    problems = []
    overlap = abs(np.vdot(psi0, psi1))
    if overlap > ORTHO_TOL:
        problems.append(f"psi0 and psi1 are not orthogonal (overlap {overlap:.3g})")
    for name, obs in (("A", a), ("B", b)):
        if obs.dim != t.dim:
            problems.append(f"{name} has dim {obs.dim}, composite dim is {t.dim}")
        elif obs.dense is not None and not qla.is_hermitian(obs.dense, 1e-10):
            problems.append(f"{name} is not Hermitian")
    return problems


def verify_theorem2_many(
    t,
    b: Observable,
    psi0,
    psi1,
    spec: SuperpositionSpec,
    observables: Sequence[Observable],
    tol: float = 1e-8,
    scenario: str = "coherence-bound",
    params: dict | None = None,
    stats: PointerStats | None = None,
) -> list[VerificationRecord]:
    """Check the coherence bound for several ``A`` sharing one transfer.

    The transfer images are computed once.  ``stats`` may be supplied when
    the pointer statistics are already known for this transfer.
    """
    psi0, psi1 = as_pure(psi0), as_pure(psi1)
    problems = []
    for a in observables:
        problems.extend(_hypothesis_violations(t, b, a, psi0, psi1))
    if problems:
        raise HypothesisError(sorted(set(problems)))
    evolved = evolve_superposition(t, psi0, psi1, spec)
    if stats is None:
        stats = evolved.pointer_stats(b)
    if stats.gap <= DEGENERATE_GAP:
        raise DegeneratePointerError(f"pointer means coincide (|b0 - b1| = {stats.gap:.3g})")
    w0, w1 = spec.weights
    factor = 2 * np.sqrt(w0 * w1)
    records = []
    for a in observables:
        norm_a = a.norm
        delta = commutator_delta(a, b) if norm_a > 0 else 0.0
        rhs = coherence_bound(delta, b.norm, stats.sigma0, stats.sigma1, stats.b0, stats.b1, norm_a)
        p = dict(params or {})
        p.update(
            weight0=float(w0),
            weight1=float(w1),
            kind=a.kind,
            coherence_factor=float(factor),
            tight_rhs=float(factor * rhs),
        )
        records.append(
            VerificationRecord(
                scenario=scenario,
                params=p,
                lhs=evolved.discrepancy(a),
                rhs=float(rhs),
                delta=float(delta),
                normA=float(norm_a),
                normB=float(b.norm),
                b0=stats.b0,
                b1=stats.b1,
                sigma0=stats.sigma0,
                sigma1=stats.sigma1,
                tol=tol,
            )
        )
    return records


def verify_theorem2(t, b, psi0, psi1, spec, a, tol=1e-8, scenario="coherence-bound", params=None):
    return verify_theorem2_many(t, b, psi0, psi1, spec, [a], tol, scenario, params)[0]


# -- purification of the ancilla ------------------------------------------------


def purified_transfer(t: TransferMap) -> tuple[TransferMap, int]:
    """Equivalent transfer with a pure ancilla on ``C^aux (x) K``.

    The unitary acts diagonally on the branch index, ``1_aux (x) U``.
    """
    phi, aux = purify(t.tau)
    u = qla.tensor(np.eye(aux), t.u)
    return TransferMap(u, density_from_pure(phi), aux * t.dimK, t.dimH), aux


def lift_observable(x: Observable, aux: int) -> Observable:
    """``1_aux (x) X`` on the purified composite space."""
    return general(qla.tensor(np.eye(aux), x.matrix))


# -- random instances ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Theorem2Instance:
    transfer: TransferMap
    b: Observable
    a: Observable
    psi0: np.ndarray
    psi1: np.ndarray
    spec: SuperpositionSpec


def random_theorem2_instance(
    rng: np.random.Generator,
    dimK: int,
    dimH: int,
    mixed_tau: bool = True,
    min_gap: float = 0.05,
    max_tries: int = 1000,
) -> Theorem2Instance:
    """Random unitary, ancilla state, unit-norm ``A`` and ``B``, with ``|b0 - b1| > min_gap``."""
    u = qla.random_unitary(dimK * dimH, rng)
    tau = random_density(dimK, rng) if mixed_tau else density_from_pure(random_pure(dimK, rng))
    t = TransferMap(u, tau, dimK, dimH)
    psi0, psi1 = random_orthonormal_pair(dimH, rng)
    r0 = apply_transfer(t, density_from_pure(psi0))
    r1 = apply_transfer(t, density_from_pure(psi1))
    for _ in range(max_tries):
        b = general(qla.random_hermitian(t.dim, rng, norm=1.0))
        if abs(expectation(r0, b) - expectation(r1, b)) > min_gap:
            break
    else:
        raise RuntimeError("could not draw a pointer with a large enough gap")
    a = general(qla.random_hermitian(t.dim, rng, norm=1.0))
    return Theorem2Instance(t, b, a, psi0, psi1, SuperpositionSpec.random(rng))


# -- two-outcome instruments -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Instrument:
    """Pointer projection ``Q`` on the ancilla of a transfer.

    ``M1(rho) = tr_K((Q (x) 1) T(rho))`` and ``M0`` uses ``1 - Q``.
    """

    transfer: TransferMap
    q: np.ndarray

    def __post_init__(self):
        q = qla.as_matrix(self.q, "pointer projection")
        if q.shape[0] != self.transfer.dimK:
            raise qla.DimensionError(f"projection has dim {q.shape[0]}, ancilla dim is {self.transfer.dimK}")
        if not qla.is_projection(q, 1e-10):
            raise ValueError("pointer operator is not a projection")
        object.__setattr__(self, "q", q)

    def branch(self, j: int, x) -> np.ndarray:
        """Subnormalized ``M_j`` applied to any square matrix on ``H`` (linear extension)."""
        t = self.transfer
        proj = self.q if j == 1 else np.eye(t.dimK) - self.q
        full = qla.tensor(proj, np.eye(t.dimH)) @ t.conjugate(x)
        return qla.partial_trace_ancilla(full, t.dimK, t.dimH)

    def superoperators(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.transfer.dimH
        return superoperator(lambda x: self.branch(0, x), d), superoperator(lambda x: self.branch(1, x), d)


def superoperator(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Matrix ``S`` with ``S @ X.reshape(-1) == fn(X).reshape(-1)`` (row-major vec)."""
    cols = []
    for idx in range(dim * dim):
        e = np.zeros(dim * dim, dtype=complex)
        e[idx] = 1.0
        cols.append(np.asarray(fn(e.reshape(dim, dim))).reshape(-1))
    return np.stack(cols, axis=1)


def apply_superoperator(s: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    return (s @ x.reshape(-1)).reshape(d, d)


@dataclass(frozen=True, eq=False)
class Conditioned:
    """Outcome probabilities and normalized post-outcome states (``None`` for null events)."""

    p0: float
    rho0: np.ndarray | None
    p1: float
    rho1: np.ndarray | None
    m0: np.ndarray = field(repr=False)
    m1: np.ndarray = field(repr=False)


def condition(inst: Instrument, rho) -> Conditioned:
    rho = as_density(rho)
    if rho.shape[0] != inst.transfer.dimH:
        raise qla.DimensionError(f"state has dim {rho.shape[0]}, system dim is {inst.transfer.dimH}")
    m0, m1 = inst.branch(0, rho), inst.branch(1, rho)
    p0, p1 = float(np.trace(m0).real), float(np.trace(m1).real)
    if abs(p0 + p1 - 1.0) > STATE_TOL:
        raise ValueError(f"outcome probabilities sum to {p0 + p1!r}")
    rho0 = m0 / p0 if p0 > NULL_EVENT else None
    rho1 = m1 / p1 if p1 > NULL_EVENT else None
    return Conditioned(p0, rho0, p1, rho1, m0, m1)


def is_perfect(inst: Instrument, psi0, psi1, tol: float = 1e-12) -> bool:
    """``Q`` reads 0 with certainty on ``T(psi0)`` and 1 on ``T(psi1)``."""
    p1_of_0 = condition(inst, density_from_pure(psi0)).p1
    p1_of_1 = condition(inst, density_from_pure(psi1)).p1
    return p1_of_0 <= tol and p1_of_1 >= 1 - tol


def joint_distribution(t: TransferMap, p, q, rho) -> np.ndarray:
    """``table[i, j] = Prob(p = i, q = j)`` in ``T(rho)`` for commuting projections."""
    p = qla.as_matrix(p, "projection p")
    q = qla.as_matrix(q, "projection q")
    for name, proj in (("p", p), ("q", q)):
        if proj.shape[0] != t.dim:
            raise qla.DimensionError(f"{name} has dim {proj.shape[0]}, composite dim is {t.dim}")
        if not qla.is_projection(proj, 1e-10):
            raise ValueError(f"{name} is not a projection")
    if qla.spectral_norm(qla.commutator(p, q)) > 1e-10:
        raise ValueError("joint distribution undefined: projections do not commute")
    state = apply_transfer(t, rho)
    eye = np.eye(t.dim)
    table = np.empty((2, 2))
    for i, pi in enumerate((eye - p, p)):
        for j, qj in enumerate((eye - q, q)):
            table[i, j] = qla.trace_product(state, pi @ qj).real
    if table.min() < -1e-12 or abs(table.sum() - 1.0) > 1e-10:
        raise ValueError(f"invalid joint table {table.tolist()}")
    return table


# -- abstract collapse (two-outcome splitting maps) ------------------------------


@dataclass
class CollapseReport:
    verdict: str  # "pass", "fail" or "inconclusive"
    hypothesis_failures: list[str]
    offdiag_norms: dict[str, float]
    collapse_error: float
    tol: float

    @property
    def conclusive(self) -> bool:
        return self.verdict != "inconclusive"


def _probe_states(psi0, psi1, rng, n_random):
    for eps in (1e-3, 1e-2, 1e-1, 1.0, 10.0):
        for phase in (0.0, np.pi / 2, np.pi, 3 * np.pi / 2):
            v = eps * np.exp(1j * phase) * psi0 + psi1
            yield v / np.linalg.norm(v)
    for _ in range(n_random):
        yield random_pure(psi0.size, rng)


def check_abstract_collapse(
    m0: np.ndarray,
    m1: np.ndarray,
    psi0,
    psi1,
    tol: float = 1e-10,
    seed: int = 0,
    n_probes: int = 32,
    n_alpha: int = 16,
) -> CollapseReport:
    """Check that perfect two-outcome splitting kills the cross terms.

    ``m0``, ``m1`` are superoperator matrices (see :func:`superoperator`).
    If ``M1(psi0) = 0`` and ``M0(psi1) = 0`` and ``M0 (+) M1`` is positive
    and trace preserving on the probes, the images of ``|psi0><psi1|`` must
    vanish and ``M(psi)`` must split as ``|a0|^2 M0(psi0) (+) |a1|^2 M1(psi1)``.
    Failed hypotheses make the report inconclusive.
    """
    psi0, psi1 = as_pure(psi0), as_pure(psi1)
    rng = np.random.default_rng(seed)
    p0, p1 = density_from_pure(psi0), density_from_pure(psi1)
    failures = []
    leak1 = qla.spectral_norm(apply_superoperator(m1, p0))
    leak0 = qla.spectral_norm(apply_superoperator(m0, p1))
    if leak1 > tol:
        failures.append(f"M1(psi0) != 0 (norm {leak1:.3g})")
    if leak0 > tol:
        failures.append(f"M0(psi1) != 0 (norm {leak0:.3g})")
    for v in _probe_states(psi0, psi1, rng, n_probes):
        probe = density_from_pure(v)
        outs = [apply_superoperator(m, probe) for m in (m0, m1)]
        low = min(np.linalg.eigvalsh((o + qla.dagger(o)) / 2)[0] for o in outs)
        herm = max(qla.spectral_norm(o - qla.dagger(o)) for o in outs)
        total = sum(np.trace(o).real for o in outs)
        if low < -tol or herm > tol:
            failures.append("splitting map is not positive on a probe state")
            break
        if abs(total - 1.0) > tol:
            failures.append(f"splitting map is not normalized on a probe (trace {total:.6g})")
            break

    cross = np.outer(psi0, np.conj(psi1))
    offdiag = {
        "M0(|psi0><psi1|)": qla.spectral_norm(apply_superoperator(m0, cross)),
        "M1(|psi0><psi1|)": qla.spectral_norm(apply_superoperator(m1, cross)),
        "M0(|psi1><psi0|)": qla.spectral_norm(apply_superoperator(m0, qla.dagger(cross))),
        "M1(|psi1><psi0|)": qla.spectral_norm(apply_superoperator(m1, qla.dagger(cross))),
    }
    target0 = apply_superoperator(m0, p0)
    target1 = apply_superoperator(m1, p1)
    err = 0.0
    for _ in range(n_alpha):
        spec = SuperpositionSpec.random(rng)
        w0, w1 = spec.weights
        psi = density_from_pure(spec.superpose(psi0, psi1))
        err = max(
            err,
            qla.spectral_norm(apply_superoperator(m0, psi) - w0 * target0),
            qla.spectral_norm(apply_superoperator(m1, psi) - w1 * target1),
        )
    if failures:
        verdict = "inconclusive"
    elif max(offdiag.values()) <= tol and err <= tol:
        verdict = "pass"
    else:
        verdict = "fail"
    return CollapseReport(verdict, failures, offdiag, float(err), tol)


def random_perfect_instrument(
    dimH: int, rng: np.random.Generator, n_kraus: int = 2
) -> tuple[Instrument, np.ndarray, np.ndarray]:
    """Instrument that reads ``psi0`` as 0 and ``psi1`` as 1 with certainty.

    Built from block-supported Kraus operators ``W_k P0`` (outcome 0) and
    ``W'_k P1`` (outcome 1), where ``P0 + P1 = 1``, ``psi0`` lies in the
    range of ``P0`` and ``psi1`` in that of ``P1``.  The Stinespring
    isometry is completed to a unitary on ``K (x) H`` with
    ``K = C^(2 n_kraus)``, ancilla prepared in ``|0>`` and
    ``Q`` projecting onto the upper half of ``K``.
    """
    if dimH < 2:
        raise ValueError("need at least two system levels")
    basis = qla.random_unitary(dimH, rng)
    psi0, psi1 = basis[:, 0], basis[:, 1]
    split = int(rng.integers(0, dimH - 1))  # extra basis vectors sent to outcome 0
    cols0 = [0] + list(range(2, 2 + split))
    cols1 = [1] + list(range(2 + split, dimH))
    proj0 = basis[:, cols0] @ qla.dagger(basis[:, cols0])
    proj1 = basis[:, cols1] @ qla.dagger(basis[:, cols1])

    m = n_kraus
    iso0 = qla.random_unitary(m * dimH, rng)[:, :dimH]
    iso1 = qla.random_unitary(m * dimH, rng)[:, :dimH]
    stinespring = np.vstack([iso0 @ proj0, iso1 @ proj1])  # (2m*dimH, dimH)
    dimK = 2 * m
    filler = rng.standard_normal((dimK * dimH, dimK * dimH - dimH)) + 0j
    q_full, _ = np.linalg.qr(np.hstack([stinespring, filler]))
    u = np.hstack([stinespring, q_full[:, dimH:]])
    tau = np.zeros((dimK, dimK), dtype=complex)
    tau[0, 0] = 1.0
    q = np.diag([0.0] * m + [1.0] * m).astype(complex)
    return Instrument(TransferMap(u, tau, dimK, dimH), q), as_pure(psi0), as_pure(psi1)
