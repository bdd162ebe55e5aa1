"""Partitioned harmonic chain: dispersion, group spectra and energy bookkeeping.

The chain has ``n * n_groups`` sites with periodic boundary conditions and is
cut into ``n_groups`` blocks of ``n`` adjacent sites.  Each isolated block has
an on-site potential ``m omega0**2 q**2`` and internal couplings
``-m omega0**2 q_i q_{i+1}``; its normal modes are the standing waves

    k_l = pi l / (a0 (n + 1)),   omega_l = 2 omega0 sin(k_l a0 / 2),   l = 1..n.

Units: hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ChainParams:
    """Physical description of the partitioned chain."""

    mass: float = 1.0
    omega0: float = 1.0
    a0: float = 1.0
    n: int = 1
    n_groups: int = 2

    def __post_init__(self):
        if not (self.mass > 0 and self.omega0 > 0 and self.a0 > 0):
            raise DomainError("mass, omega0 and a0 must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"group size n must be an integer >= 1, got {self.n}")
        if int(self.n_groups) != self.n_groups or self.n_groups < 2:
            raise DomainError(f"n_groups must be an integer >= 2, got {self.n_groups}")

    @property
    def theta(self) -> float:
        """Debye temperature ``hbar v k_D`` with ``v = omega0 a0``, ``k_D = pi / a0``."""
        return math.pi * self.omega0

    @property
    def sound_velocity(self) -> float:
        return self.omega0 * self.a0

    @property
    def coupling(self) -> float:
        """Prefactor of the bond term ``V(q, q') = coupling * q * q'``."""
        return -self.mass * self.omega0**2


@dataclass(frozen=True)
class GroupSpectrum:
    """Normal modes of one isolated group, ordered by mode index ``l``."""

    wavenumbers: np.ndarray
    frequencies: np.ndarray

    def __len__(self):
        return len(self.frequencies)


@dataclass(frozen=True)
class OccupationState:
    """Product eigenstate ``|a>`` of the decoupled groups."""

    occupations: tuple  # n_groups tuples of n mode occupations
    group_energies: np.ndarray
    total_energy: float


def dispersion(params: ChainParams, k: float) -> float:
    """Angular frequency ``2 omega0 |sin(k a0 / 2)|`` of a mode with wavenumber ``k``.

    ``k a0`` must lie in ``(0, pi]``.
    """
    ka = k * params.a0
    if not (0.0 < ka <= math.pi):
        raise DomainError(f"k*a0 must lie in (0, pi], got {ka}")
    return 2.0 * params.omega0 * abs(math.sin(0.5 * ka))


def group_spectrum(params: ChainParams) -> GroupSpectrum:
    l = np.arange(1, params.n + 1)
    k = np.pi * l / (params.a0 * (params.n + 1))
    # direct sine evaluation, accurate for large n
    w = 2.0 * params.omega0 * np.sin(0.5 * k * params.a0)
    return GroupSpectrum(wavenumbers=k, frequencies=w)


def mode_shapes(n: int) -> np.ndarray:
    """Orthonormal site amplitudes ``S[j, l]`` of the group modes (0-based indices)."""
    j = np.arange(1, n + 1)
    return math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))


def ground_state_energy(params: ChainParams, mode: str = "exact") -> float:
    """Ground-state energy of the decoupled groups.

    ``mode="exact"`` sums the zero-point energies of all group modes;
    ``mode="debye"`` returns ``n * n_groups * theta / 4``.
    """
    if mode == "exact":
        return params.n_groups * 0.5 * float(np.sum(group_spectrum(params).frequencies))
    if mode == "debye":
        return params.n * params.n_groups * params.theta / 4.0
    raise ValueError(f"unknown mode {mode!r}; expected 'exact' or 'debye'")


def state_energy(params: ChainParams, occupations: Sequence[Sequence[int]]) -> OccupationState:
    occ = np.asarray(occupations)
    if occ.shape != (params.n_groups, params.n):
        raise ValueError(
            f"occupations must have shape ({params.n_groups}, {params.n}), got {occ.shape}"
        )
    if not np.issubdtype(occ.dtype, np.integer):
        if not np.all(np.isfinite(occ)) or np.any(occ != np.round(occ)):
            raise ValueError("occupations must be finite integers")
        occ = occ.astype(np.int64)
    if np.any(occ < 0):
        raise ValueError("occupations must be non-negative")
    w = group_spectrum(params).frequencies
    e_mu = (occ + 0.5) @ w
    return OccupationState(
        occupations=tuple(tuple(int(v) for v in row) for row in occ),
        group_energies=e_mu,
        total_energy=float(np.sum(e_mu)),
    )
