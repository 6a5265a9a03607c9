"""Two- and three-qubit transfer models: controlled-not and repeated readout."""

from __future__ import annotations

import numpy as np

from .. import qla
from ..observables import DEFAULT_POINTER_SIGN, Observable, SiteSystem, site_local, spin_pointer
from ..states import SuperpositionSpec, basis_state, density_from_pure
from ..transfer import Instrument, TransferMap, joint_distribution

PSI0 = basis_state(2, 0)
PSI1 = basis_state(2, 1)
P0 = density_from_pure(PSI0)
P1 = density_from_pure(PSI1)


def controlled_flips(n_targets: int, flipped) -> np.ndarray:
    """Permutation on ``(C^2)^n_targets (x) C^2`` flipping the listed targets when the last qubit is 1.

    Target 0 is the most significant qubit.
    """
    dim = 2 ** (n_targets + 1)
    qla.check_dim(dim)
    mask = 0
    for site in flipped:
        if not 0 <= site < n_targets:
            raise IndexError(f"target {site} out of range")
        mask |= 1 << (n_targets - 1 - site)
    idx = np.arange(dim)
    control = idx & 1
    image = np.where(control == 1, ((idx >> 1) ^ mask) << 1 | 1, idx)
    u = np.zeros((dim, dim), dtype=complex)
    u[image, idx] = 1.0
    return u


def cnot_model(pointer_sign: int = DEFAULT_POINTER_SIGN) -> tuple[TransferMap, Observable]:
    """Ancilla qubit flipped iff the system qubit is ``psi1``; ancilla starts in ``psi0``."""
    u = qla.tensor(np.eye(2), P0) + qla.tensor(qla.PAULI_X, P1)
    t = TransferMap(u, P0, 2, 2)
    pointer = site_local(spin_pointer(pointer_sign), 0, SiteSystem.qubits(2))
    return t, pointer


def cnot_instrument() -> Instrument:
    """Pointer projection onto the flipped ancilla, ``Q = |psi1><psi1|``."""
    t, _ = cnot_model()
    return Instrument(t, P1)


def repeated_measurement_model() -> TransferMap:
    """Two ancilla qubits, each flipped by a controlled-not from the system, ``U = U2 U1``."""
    u1 = controlled_flips(2, [0])
    u2 = controlled_flips(2, [1])
    tau = qla.tensor(P0, P0)
    return TransferMap(u2 @ u1, tau, 4, 2)


def repeated_measurement_joint(spec: SuperpositionSpec) -> np.ndarray:
    """Joint law of the two pointer spins after the transfer.

    ``table[i, j] = Prob(s1 = s(i), s2 = s(j))`` with index 0 for spin -1
    (unflipped, ``psi0``) and index 1 for spin +1.
    """
    t = repeated_measurement_model()
    first = qla.tensor_all([P1, np.eye(2), np.eye(2)])
    second = qla.tensor_all([np.eye(2), P1, np.eye(2)])
    rho = density_from_pure(spec.superpose(PSI0, PSI1))
    return joint_distribution(t, first, second, rho)
