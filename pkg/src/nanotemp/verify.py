"""Battery of exact-diagonalization checks run by ``nanotemp verify``."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import List

import numpy as np

from .chain import ChainParams, group_spectrum
from .oracle import (
    TruncatedBasis,
    moments,
    offdiag_scan,
    sample_states_in_range,
    sigma_mode_sum,
    single_excitations,
    w_distribution,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def run_checks(params: ChainParams, local_dim: int, beta: float = 0.2, max_dim: int = 20000) -> List[CheckResult]:
    basis = TruncatedBasis(params, local_dim, max_dim)
    # moments() never enumerates the basis, so the larger cutoff needs no cap
    wider = TruncatedBasis(params, local_dim + 1, sys.maxsize)
    # states whose H|a> stays inside the basis
    states = [s for s in single_excitations(params) if max(map(max, s.occupations)) <= local_dim - 2]
    out = []

    eps = max(np.max(np.abs(moments(basis, s).eps_mu)) for s in states)
    out.append(CheckResult("eps_mu_zero", eps < 1e-10, f"max |eps_mu| = {eps:.3g}"))

    tilde = max(np.max(np.abs(moments(basis, s).sigma2_tilde_mu)) for s in states)
    out.append(CheckResult("sigma_tilde_zero", tilde < 1e-10, f"max |sigma~_mu^2| = {tilde:.3g}"))

    add = max(_rel(moments(basis, s).sigma2_mu.sum(), moments(basis, s).sigma2_a) for s in states)
    out.append(CheckResult("sigma_additive", add < 1e-10, f"max rel |sum sigma_mu^2 - sigma_a^2| = {add:.3g}"))

    closed = max(_rel(moments(basis, s).sigma2_a, sigma_mode_sum(params, s.occupations)[1]) for s in states)
    out.append(CheckResult("closed_form", closed < 1e-10, f"max rel deviation from mode sums = {closed:.3g}"))

    worst_mean = worst_var = worst_total = 0.0
    for s in states:
        m = moments(basis, s)
        w = w_distribution(basis, s)
        worst_mean = max(worst_mean, _rel(w.mean, m.y_a))
        worst_var = max(worst_var, _rel(w.variance, m.sigma2_a))
        worst_total = max(worst_total, abs(w.total - 1.0))
    out.append(CheckResult("spectral_mean", worst_mean < 1e-8, f"max rel error = {worst_mean:.3g}"))
    out.append(CheckResult("spectral_variance", worst_var < 1e-8, f"max rel error = {worst_var:.3g}"))
    out.append(CheckResult("completeness", worst_total < 1e-9, f"max |sum w - 1| = {worst_total:.3g}"))

    conv = 0.0
    for s in states:
        a, b = moments(basis, s), moments(wider, s)
        conv = max(conv, _rel(b.sigma2_a, a.sigma2_a), abs(b.eps_a - a.eps_a))
    out.append(CheckResult("truncation_convergence", conv < 1e-6, f"max change with local_dim + 1 = {conv:.3g}"))

    rep = offdiag_scan(basis, beta)
    out.append(CheckResult("offdiag_suppressed", rep.ratio < 1.0, f"beta = {beta}: max offdiag / min diag = {rep.ratio:.3g} over {rep.pairs} pairs"))

    rng = np.random.default_rng(0)
    floor = np.inf
    for ng in (2, 3, 4, 5):
        p = ChainParams(params.mass, params.omega0, params.a0, params.n, ng)
        zp = 0.5 * float(np.sum(group_spectrum(p).frequencies))
        for s in sample_states_in_range(p, zp, zp + 4.0 * params.omega0 * params.n, 20, rng):
            floor = min(floor, sigma_mode_sum(p, s.occupations)[1] / ng)
    out.append(CheckResult("variance_growth", floor > 0, f"min sigma_a^2 / N_G over N_G = 2..5: {floor:.3g}"))
    return out

