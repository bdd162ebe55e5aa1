"""Minimal group size and length scale for a local temperature."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from .criteria import evaluate_criteria
from .errors import DomainError

ANGSTROM = 1e-10
MATERIALS_ENV = "NANOTEMP_MATERIALS"

# groups smaller than this are outside the continuum approximation
DEBYE_VALID_N = 100


@dataclass(frozen=True)
class Material:
    name: str
    theta: float  # kelvin
    a0: float  # metres

    def __post_init__(self):
        if not (self.theta > 0 and self.a0 > 0):
            raise DomainError(f"material {self.name!r}: theta and a0 must be positive")


MATERIALS: Dict[str, Material] = {
    m.name: m
    for m in (
        Material("iron", 470.0, 2.5 * ANGSTROM),
        Material("carbon", 2230.0, 1.5 * ANGSTROM),
        Material("silicon", 645.0, 2.4 * ANGSTROM),
    )
}


def load_materials(path) -> Dict[str, Material]:
    """Read a JSON array of ``{"name", "theta_K", "a0_angstrom"}`` objects."""
    with open(path) as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValueError(f"{path}: expected a JSON array of materials")
    table = {}
    for entry in entries:
        try:
            m = Material(str(entry["name"]), float(entry["theta_K"]), float(entry["a0_angstrom"]) * ANGSTROM)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: malformed material entry {entry!r}") from exc
        table[m.name] = m
    return table


def get_material(name: str, path=None) -> Material:
    """Look up a material in the built-in table, extended by ``path`` or ``$NANOTEMP_MATERIALS``."""
    table = dict(MATERIALS)
    path = path or os.environ.get(MATERIALS_ENV)
    if path:
        table.update(load_materials(Path(path)))
    try:
        return table[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {', '.join(sorted(table))}") from None


@dataclass(frozen=True)
class NminPoint:
    t_ratio: float
    n_min: int
    bound1: Optional[float]  # None when inapplicable
    bound2: float
    binding: str
    beta_loc_equals_beta: bool
    l_min: Optional[float] = None  # metres

    @property
    def debye_valid(self) -> bool:
        return self.n_min >= DEBYE_VALID_N


def _check(t_ratio, alpha, delta):
    if not t_ratio > 0:
        raise DomainError(f"T/theta must be positive, got {t_ratio}")
    if not alpha >= 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def nmin_at(t_ratio: float, alpha: float = 10.0, delta: float = 0.01, a0: Optional[float] = None) -> NminPoint:
    """Smallest group size satisfying both conditions at ``T / theta = t_ratio``.

    If the lattice constant ``a0`` is given, ``l_min = n_min * a0`` is filled in.
    """
    _check(t_ratio, alpha, delta)
    rep = evaluate_criteria(t_ratio, alpha, delta)
    return NminPoint(
        t_ratio=t_ratio,
        n_min=rep.n_min,
        bound1=rep.bound_cond1,
        bound2=rep.bound_cond2,
        binding=rep.binding,
        beta_loc_equals_beta=rep.beta_loc_equals_beta,
        l_min=None if a0 is None else rep.n_min * a0,
    )


def nmin_asymptotic(t_ratio: float, alpha: float = 10.0, delta: float = 0.01) -> float:
    """High- and low-temperature limits of ``n_min``."""
    _check(t_ratio, alpha, delta)
    if t_ratio > 1:
        return 2.0 * alpha / delta
    return 3.0 * alpha / (2.0 * math.pi**2) / t_ratio**3


def nmin_curve(t_grid: Iterable[float], alpha: float = 10.0, delta: float = 0.01, a0: Optional[float] = None) -> List[NminPoint]:
    grid = list(t_grid)
    if not grid:
        raise ValueError("temperature grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("temperature grid must be strictly increasing")
    return [nmin_at(t, alpha, delta, a0) for t in grid]


def log_grid(tmin: float, tmax: float, points: int) -> List[float]:
    if not (0 < tmin <= tmax) or points < 1:
        raise DomainError("grid needs 0 < tmin <= tmax and at least one point")
    if points == 1:
        return [tmin]
    step = (math.log10(tmax) - math.log10(tmin)) / (points - 1)
    return [10 ** (math.log10(tmin) + i * step) for i in range(points)]


def lmin(material: Material, T: float, alpha: float = 10.0, delta: float = 0.01) -> float:
    """Minimal length ``n_min a0`` in metres at temperature ``T`` kelvin."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    return nmin_at(T / material.theta, alpha, delta, material.a0).l_min
