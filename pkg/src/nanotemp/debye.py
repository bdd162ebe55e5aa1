"""Debye thermodynamics of the chain.

The thermal energy per site above the ground state, in units of the Debye
temperature, is

    ebar(t) = t**2 * B(1/t),    B(u) = int_0^u x / (exp(x) - 1) dx,

with ``t = T / theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain import ChainParams, ground_state_energy
from .errors import DomainError

PI2_6 = math.pi**2 / 6.0

_SERIES_CUT = 1e-2
_TAIL_SPLIT = 40.0

# Bernoulli numbers B_k for k = 0, 1, 2, 4, ..., 12 (odd k > 1 vanish)
_BERNOULLI = {0: 1.0, 1: -0.5, 2: 1 / 6, 4: -1 / 30, 6: 1 / 42, 8: -1 / 30, 10: 5 / 66, 12: -691 / 2730}


@lru_cache(maxsize=8)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def _integrand(x):
    return x / np.expm1(x)


def _series_integral(u: float) -> float:
    # int_0^u sum_k B_k x^k / k! dx, valid for u << 2 pi
    return sum(b * u ** (k + 1) / ((k + 1) * math.factorial(k)) for k, b in _BERNOULLI.items())


def _panel(a: float, b: float, order: int) -> float:
    x, w = _gauss_legendre(order)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, _integrand(half * x + 0.5 * (a + b))))


def _adaptive(a: float, b: float, tol: float, order: int, depth: int = 0) -> float:
    whole = _panel(a, b, order)
    mid = 0.5 * (a + b)
    left = _panel(a, mid, order)
    right = _panel(mid, b, order)
    # refinement below round-off cannot converge
    if abs(left + right - whole) <= max(tol, 1e-15 * abs(whole)) or depth >= 40:
        return left + right
    return _adaptive(a, mid, 0.5 * tol, order, depth + 1) + _adaptive(mid, b, 0.5 * tol, order, depth + 1)


def _tail(u: float, terms: int = 8) -> float:
    # int_u^inf x/(e^x-1) dx = sum_k e^{-k u} (u/k + 1/k^2)
    return sum(math.exp(-k * u) * (u / k + 1.0 / k**2) for k in range(1, terms + 1))


def bose_integral(u: float, *, order: int = 20, tol: float = 1e-14) -> float:
    """Integral of ``x / (exp(x) - 1)`` from 0 to ``u``.

    Accepts ``u = inf``.  Accurate to about 1e-14 absolute with the default
    settings.

    Parameters
    ----------
    u : float
        Upper limit, ``u >= 0``.
    order : int
        Gauss-Legendre nodes per panel.
    tol : float
        Absolute error target of the adaptive panel refinement.
    """
    if math.isnan(u) or u < 0:
        raise DomainError(f"upper limit must be >= 0, got {u}")
    if u == 0:
        return 0.0
    if u <= _SERIES_CUT:
        return _series_integral(u)
    if u > _TAIL_SPLIT:
        return PI2_6 - _tail(u) if math.isfinite(u) else PI2_6
    return _series_integral(_SERIES_CUT) + _adaptive(_SERIES_CUT, u, tol, order)


def ebar(t_ratio: float, **quad) -> float:
    """Thermal energy per site above the ground state, in units of ``k_B theta``."""
    if not t_ratio > 0:
        raise DomainError(f"T/theta must be positive, got {t_ratio}")
    if math.isinf(t_ratio):
        raise DomainError("T/theta must be finite")
    return t_ratio**2 * bose_integral(1.0 / t_ratio, **quad)


def ebar_crossing(level: float = 0.25, lo: float = 1e-3, hi: float = 1e3, xtol: float = 1e-12) -> float:
    """Temperature ratio at which ``ebar`` equals ``level``, by bisection.

    ``level = 1/4`` is the point where the thermal energy equals the
    ground-state energy.
    """
    f_lo, f_hi = ebar(lo) - level, ebar(hi) - level
    if f_lo * f_hi > 0:
        raise DomainError(f"ebar does not cross {level} in [{lo}, {hi}]")
    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        if ebar(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ThermalPoint:
    t_ratio: float
    ebar: float
    beta: float


@dataclass(frozen=True)
class EnergyRange:
    """Admissible per-group energies ``e_min <= E_mu <= e_max``."""

    e_min: float
    e_max: float
    alpha: float

    def __contains__(self, energy):
        return self.e_min <= energy <= self.e_max


def thermal_point(t_ratio: float, theta: float = 1.0) -> ThermalPoint:
    return ThermalPoint(t_ratio=t_ratio, ebar=ebar(t_ratio), beta=1.0 / (t_ratio * theta))


def energy_range(tp: ThermalPoint, params: ChainParams, alpha: float) -> EnergyRange:
    """Per-group energy window centred on the thermal peak, widened by ``alpha``."""
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    e_thermal = tp.ebar * params.n * params.theta  # Ebar / N_G
    e0 = ground_state_energy(params, "debye") / params.n_groups
    return EnergyRange(e_min=e_thermal / alpha + e0, e_max=alpha * e_thermal + e0, alpha=alpha)
