"""Existence conditions for a local temperature.

Two families live here.  The general forms act on product-state moments
(energy ``E_a``, interaction shift ``eps_a``, energy variance ``sigma2_a``):
``cond1_margin`` must be positive and ``-eps_a + beta sigma2_a / 2`` must be
linear in ``E_a`` (``cond2_linearity``).  The harmonic-chain forms are the
closed-form lower bounds on the group size ``n`` obtained in the Debye
approximation, with temperatures measured as ``t = T / theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .debye import ebar as _ebar
from .errors import DomainError


@dataclass(frozen=True)
class GeneralConditionInput:
    e_a: float
    eps_a: float
    sigma2_a: float
    beta: float
    e0: float
    n_groups: int

    def __post_init__(self):
        if not self.sigma2_a > 0:
            raise DomainError(f"sigma_a^2 must be positive, got {self.sigma2_a}")
        if self.n_groups < 2:
            raise DomainError(f"n_groups must be >= 2, got {self.n_groups}")

    @property
    def y_a(self) -> float:
        return self.e_a + self.eps_a


def cond1_margin(inp: GeneralConditionInput) -> float:
    """Scaled distance of the erfc argument from zero; the condition needs it > 0."""
    num = inp.y_a - inp.e0 - inp.beta * inp.sigma2_a
    return num / (math.sqrt(inp.n_groups) * math.sqrt(2.0 * inp.sigma2_a))


def debye_sigma2(group_energies: Sequence[float], n: int) -> float:
    """``sum_mu 4 n^-2 E_mu E_{mu+1}`` around the ring of groups."""
    e = np.asarray(group_energies, dtype=float)
    return float(4.0 / n**2 * np.dot(e, np.roll(e, -1)))


def harmonic_cond1_margin(group_energies: Sequence[float], e0: float, beta: float, n: int) -> float:
    """The first condition for the harmonic chain in Debye approximation.

    Uses ``eps_a = 0`` and ``sigma2_a = debye_sigma2(group_energies, n)``,
    written out directly rather than through ``cond1_margin``.
    """
    e = np.asarray(group_energies, dtype=float)
    s = float(np.sum(e * np.roll(e, -1)))
    num = float(np.sum(e)) - e0 - 4.0 * beta * s / n**2
    return num / (math.sqrt(len(e)) * math.sqrt(2.0) * math.sqrt(4.0 * s / n**2))


def subgroup_energy_term(n: int, beta: float, e_prev: float, e_next: float, e0_per_group: float) -> float:
    """Energy-dependent part of the derivative of the subgroup condition.

    The subgroup condition is satisfied when this is small compared to one.
    """
    return beta / n**2 * (e_prev + e_next - 2.0 * e0_per_group)


def cond2_linearity(samples: Sequence[Sequence[float]], beta: float):
    """Least-squares slope and worst residual of ``-eps_a + beta sigma2_a / 2`` vs ``E_a``.

    Parameters
    ----------
    samples : sequence of (E_a, eps_a, sigma2_a)
        At least three samples with distinct ``E_a``.
    beta : float
        Inverse temperature.

    Returns
    -------
    c1 : float
        Fitted slope; ``|c1| << 1`` means the local temperature equals the
        global one.
    residual : float
        Maximum absolute deviation from the fitted line.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3 or s.shape[0] < 3:
        raise ValueError("need at least three (E_a, eps_a, sigma2_a) samples")
    e_a = s[:, 0]
    if np.ptp(e_a) == 0:
        raise ValueError("samples must span distinct E_a values")
    lhs = -s[:, 1] + 0.5 * beta * s[:, 2]
    design = np.column_stack([e_a, np.ones_like(e_a)])
    (c1, c2), *_ = np.linalg.lstsq(design, lhs, rcond=None)
    residual = float(np.max(np.abs(lhs - (c1 * e_a + c2))))
    return float(c1), residual


def harm_bound_cond1(t_ratio: float, alpha: float, ebar: float) -> Optional[float]:
    """Lower bound on ``n`` from the first condition, or ``None`` when irrelevant.

    The bound only matters while the thermal energy is below the ground-state
    energy (``ebar < 1/4``); above that the subgroup condition is stronger.
    """
    if not ebar > 0:
        raise DomainError(f"ebar must be positive, got {ebar}")
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if ebar >= 0.25:
        return None
    return 4.0 / t_ratio * (alpha / ebar) * (ebar / alpha + 0.25) ** 2


def harm_bound_cond2(t_ratio: float, alpha: float, delta: float, ebar: float) -> float:
    """Lower bound ``(2 alpha / delta) (theta / T) ebar`` on ``n`` from the subgroup condition."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if not ebar > 0:
        raise DomainError(f"ebar must be positive, got {ebar}")
    return 2.0 * alpha / delta / t_ratio * ebar


class Intensivity(NamedTuple):
    value: float
    threshold: float
    passes: bool


def intensivity_constant(n: int, beta: float, e0_per_group: float, alpha: float = 10.0, delta: float = 0.01) -> Intensivity:
    """Constant part ``(2 beta / n^2) E_0 / N_G`` of the subgroup derivative.

    It passes when below ``sqrt(delta) / (sqrt(2) alpha) - delta / alpha^2``,
    the largest value it can take once ``n`` exceeds both harmonic bounds.
    """
    if n < 1 or not beta > 0:
        raise DomainError("need n >= 1 and beta > 0")
    value = 2.0 * beta / n**2 * e0_per_group
    threshold = math.sqrt(delta) / (math.sqrt(2.0) * alpha) - delta / alpha**2
    return Intensivity(value, threshold, value < threshold)


def strict_ceiling(bound: float) -> int:
    """Smallest integer strictly greater than ``bound``."""
    return math.floor(bound) + 1


@dataclass(frozen=True)
class CriterionReport:
    t_ratio: float
    ebar: float
    bound_cond1: Optional[float]  # None when inapplicable
    bound_cond2: float
    intensivity_const: float
    intensivity_threshold: float
    binding: str  # "cond1" or "cond2"
    n_min: int
    beta_loc_equals_beta: bool


def evaluate_criteria(t_ratio: float, alpha: float = 10.0, delta: float = 0.01, min_n: int = 2) -> CriterionReport:
    """Both harmonic bounds, the resulting ``n_min`` and the intensivity check at ``n_min``."""
    if not t_ratio > 0:
        raise DomainError(f"T/theta must be positive, got {t_ratio}")
    eb = _ebar(t_ratio)
    b1 = harm_bound_cond1(t_ratio, alpha, eb)
    b2 = harm_bound_cond2(t_ratio, alpha, delta, eb)
    if b1 is not None and b1 > b2:
        binding, top = "cond1", b1
    else:
        binding, top = "cond2", b2
    n_min = max(min_n, strict_ceiling(top))
    # theta = 1: beta = 1/t, E_0/N_G = n/4
    check = intensivity_constant(n_min, 1.0 / t_ratio, n_min / 4.0, alpha, delta)
    return CriterionReport(
        t_ratio=t_ratio,
        ebar=eb,
        bound_cond1=b1,
        bound_cond2=b2,
        intensivity_const=check.value,
        intensivity_threshold=check.threshold,
        binding=binding,
        n_min=n_min,
        beta_loc_equals_beta=check.passes,
    )
