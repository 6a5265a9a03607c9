"""Closed-form bound calculators for macroscopic pointers.

These take scalar inputs only and stay meaningful at ``N ~ 1e23`` where
no matrix computation is possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..transfer import DegeneratePointerError, coherence_bound

CAT_BOX_HEIGHT = 1.0  # m, taken as ||Z||
CAT_HEIGHT_DIFFERENCE = 0.1  # m, standing vs. dropped


def corollary3_bound(n, normB, sigma0, sigma1, b0, b1, normA) -> float:
    """Coherence bound for micro/macro ``A`` against a macroscopic pointer on ``n`` sites.

    Same as :func:`coherence_bound` with ``delta = 2/n``.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return coherence_bound(2.0 / n, normB, sigma0, sigma1, b0, b1, normA)


def hepp_bound(n, normA: float = 1.0) -> float:
    """Pointer means -1 and +1, no spread: ``||A|| / n``."""
    return corollary3_bound(n, 1.0, 0.0, 0.0, -1.0, 1.0, normA)


def thermal_bound(n, eps: float, normA: float = 1.0) -> float:
    """``(1/(|eps| n) + sqrt(1 - eps^2)/(|eps| sqrt(n))) ||A||`` for the thermal chain."""
    if abs(eps) <= 1e-12:
        raise DegeneratePointerError("infinite temperature: pointer means coincide")
    return (1.0 / (abs(eps) * n) + np.sqrt(1.0 - eps ** 2) / (abs(eps) * np.sqrt(n))) * normA


def cat_bound(
    n,
    norm_z: float = CAT_BOX_HEIGHT,
    dz: float = CAT_HEIGHT_DIFFERENCE,
    sigma0: float = 0.0,
    sigma1: float = 0.0,
    normA: float = 1.0,
) -> float:
    """Centre-of-mass pointer of an ``n``-atom cat; ``20/n`` with the default numbers."""
    return corollary3_bound(n, norm_z, sigma0, sigma1, 0.0, dz, normA)


@dataclass(frozen=True)
class Box:
    L: float
    c: float


@dataclass(frozen=True)
class BoundInputs:
    """Scalars entering the energy-pointer estimate for particle ``n``.

    ``vN`` characteristic speed, ``xN``/``xNprime`` characteristic positions
    in the two states, ``sigma``/``sigmaPrime`` their energy spreads and
    ``deltaE`` the energy gap.
    """

    hbar: float
    vN: float
    xN: float
    xNprime: float
    sigma: float
    sigmaPrime: float
    deltaE: float
    box: Box | None = None

    def __post_init__(self):
        if not self.deltaE > 0:
            raise ValueError("energy gap must be positive")
        values = (self.hbar, self.vN, self.xN, self.xNprime, self.sigma, self.sigmaPrime)
        if any(v < 0 for v in values):
            raise ValueError("bound inputs must be nonnegative")
        if self.box is not None and (self.box.L < 0 or self.box.c < 0):
            raise ValueError("box size and speed limit must be nonnegative")


def energy_pointer_bound(inp: BoundInputs) -> float:
    """Bound on ``|<psi| x_n psi'>|`` when energy is the pointer.

    Without a box: ``(hbar vN + sigma xN' + sigma' xN) / dE``.  In an
    ``L``-box with speeds below ``c``: ``(hbar c + L (sigma + sigma')) / dE``.
    """
    if inp.box is None:
        num = inp.hbar * inp.vN + inp.sigma * inp.xNprime + inp.sigmaPrime * inp.xN
    else:
        num = inp.hbar * inp.box.c + inp.box.L * (inp.sigma + inp.sigmaPrime)
    return num / inp.deltaE


def energy_scaling_inputs(n, gap_per_site=1.0, spread_per_root=1.0, hbar=1.0, c=1.0, L=1.0) -> BoundInputs:
    """Boxed inputs with ``dE = gap_per_site * n`` and ``sigma + sigma' = spread_per_root * sqrt(n)``."""
    half = 0.5 * spread_per_root * np.sqrt(n)
    return BoundInputs(hbar, 0.0, 0.0, 0.0, half, half, gap_per_site * n, Box(L, c))


def leakage_bound(sigma_meas: float, s0: float, s1: float) -> float:
    """``2 sigma / |s0 - s1|``: the pointer sits outside the system so ``delta = 0``."""
    if sigma_meas < 0:
        raise ValueError("measurement spread must be nonnegative")
    return coherence_bound(0.0, 0.0, sigma_meas, sigma_meas, s0, s1, 1.0)


def is_vacuous(bound: float, normA: float = 1.0) -> bool:
    """The discrepancy never exceeds ``2 ||A||``, so such bounds say nothing."""
    return bound >= 2.0 * normA
