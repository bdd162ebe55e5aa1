"""Minimal length scales for local temperature in harmonic chains.

Internal units use hbar = k_B = 1.  The Debye temperature of a chain with
nearest-neighbour frequency ``omega0`` is ``theta = pi * omega0``.
"""

from .chain import (
    ChainParams,
    GroupSpectrum,
    OccupationState,
    dispersion,
    group_spectrum,
    ground_state_energy,
    state_energy,
)
from .criteria import (
    CriterionReport,
    GeneralConditionInput,
    cond1_margin,
    cond2_linearity,
    evaluate_criteria,
    harm_bound_cond1,
    harm_bound_cond2,
    intensivity_constant,
)
from .debye import EnergyRange, ThermalPoint, bose_integral, ebar, energy_range, thermal_point
from .errors import DomainError, TruncationError
from .nmin import MATERIALS, Material, NminPoint, lmin, load_materials, nmin_asymptotic, nmin_at, nmin_curve

__version__ = "0.1.0"
