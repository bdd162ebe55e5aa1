"""Exact small-system checks in the group normal-mode number basis.

States are products of number states of all group modes, so the decoupled
Hamiltonian ``H0`` is diagonal by construction.  The bond between the last
site of group ``mu`` and the first site of group ``mu + 1`` (periodically) is

    V_mu = -m omega0**2 q_last^(mu) q_first^(mu+1),
    q_j = sum_l S[j, l] (a_l + a_l^dag) / sqrt(2 m omega_l).

Two independent routes are provided.  ``moments`` applies the ladder
operators to a single product state held as a sparse dict; ``w_distribution``
and ``offdiag_scan`` build the full truncated Hamiltonian from Kronecker
products and diagonalize it densely.  ``sigma_mode_sum`` gives the same
variances in closed form without any truncation.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy import special

from .chain import ChainParams, OccupationState, group_spectrum, mode_shapes, state_energy
from .errors import DomainError, TruncationError

DEFAULT_MAX_DIM = 20000

# |x| above which log erfc(x) switches to the asymptotic series
ERFC_ASYMPTOTIC_CUT = 25.0


@dataclass(frozen=True)
class TruncatedBasis:
    """Product number states with every mode occupation below ``local_dim``."""

    params: ChainParams
    local_dim: int
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if self.local_dim < 2:
            raise TruncationError("local_dim must be at least 2")
        if self.dim > self.max_dim:
            raise TruncationError(
                f"basis dimension {self.local_dim}^{self.n_modes} = {self.dim} exceeds cap {self.max_dim}"
            )

    @property
    def n_modes(self) -> int:
        return self.params.n * self.params.n_groups

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_modes

    def index(self, occupations) -> int:
        """Position of a product state in the mixed-radix enumeration (first mode slowest)."""
        idx = 0
        for v in _flatten(occupations):
            if not 0 <= v < self.local_dim:
                raise TruncationError(f"occupation {v} outside local_dim {self.local_dim}")
            idx = idx * self.local_dim + v
        return idx

    def states(self):
        """All flattened occupation tuples in enumeration order."""
        return itertools.product(range(self.local_dim), repeat=self.n_modes)

    def contains(self, occupations) -> bool:
        return all(0 <= v < self.local_dim for v in _flatten(occupations))

    def diagonal_energies(self) -> np.ndarray:
        w = np.tile(group_spectrum(self.params).frequencies, self.params.n_groups)
        occ = np.array(list(self.states()), dtype=float).reshape(self.dim, self.n_modes)
        return (occ + 0.5) @ w


def _flatten(occupations) -> Tuple[int, ...]:
    if isinstance(occupations, OccupationState):
        occupations = occupations.occupations
    flat = []
    for row in occupations:
        if isinstance(row, (int, np.integer)):
            flat.append(int(row))
        else:
            flat.extend(int(v) for v in row)
    return tuple(flat)


def _boundary_coefficients(params: ChainParams):
    """Ladder coefficients of the first and last site positions of a group."""
    w = group_spectrum(params).frequencies
    s = mode_shapes(params.n)
    scale = 1.0 / np.sqrt(2.0 * params.mass * w)
    return s[0] * scale, s[-1] * scale


# ---------------------------------------------------------------------------
# sparse ladder algebra on single states


def _apply_position(vec: Dict[tuple, float], group: int, coeffs: np.ndarray, n: int) -> Dict[tuple, float]:
    out: Dict[tuple, float] = defaultdict(float)
    for occ, amp in vec.items():
        for l, c in enumerate(coeffs):
            if c == 0.0:
                continue
            m = group * n + l
            v = occ[m]
            if v > 0:
                lowered = occ[:m] + (v - 1,) + occ[m + 1:]
                out[lowered] += amp * c * math.sqrt(v)
            raised = occ[:m] + (v + 1,) + occ[m + 1:]
            out[raised] += amp * c * math.sqrt(v + 1)
    return out


def _apply_bond(params: ChainParams, occ: tuple, mu: int, first, last) -> Dict[tuple, float]:
    nxt = (mu + 1) % params.n_groups
    vec = _apply_position({occ: 1.0}, nxt, first, params.n)
    vec = _apply_position(vec, mu, last, params.n)
    return {k: params.coupling * v for k, v in vec.items()}


def _truncate(vec: Dict[tuple, float], d: int):
    kept, leaked = {}, 0.0
    for k, v in vec.items():
        if max(k) < d:
            kept[k] = v
        else:
            leaked += v * v
    return kept, leaked


def _dot(u: Dict[tuple, float], v: Dict[tuple, float]) -> float:
    if len(u) > len(v):
        u, v = v, u
    return sum(a * v.get(k, 0.0) for k, a in u.items())


@dataclass(frozen=True)
class MomentSet:
    e_a: float
    eps_a: float
    sigma2_a: float
    eps_mu: np.ndarray
    sigma2_mu: np.ndarray
    sigma2_tilde_mu: np.ndarray
    leakage: float  # squared norm of H|a> lost to truncation
    leak_tol: float = 1e-12

    @property
    def y_a(self) -> float:
        return self.e_a + self.eps_a

    @property
    def leaked(self) -> bool:
        return self.leakage > self.leak_tol


def moments(basis: TruncatedBasis, state: OccupationState, leak_tol: float = 1e-12) -> MomentSet:
    """Energy shift and variances of ``|a>`` under the full chain Hamiltonian.

    Everything is evaluated inside ``basis``; components of ``H|a>`` that fall
    outside are dropped and their squared norm is reported as ``leakage``.
    Group blocks are ``calH_mu = h_mu + V_mu`` with ``h_mu`` the isolated
    group Hamiltonian.
    """
    params = basis.params
    occ = _flatten(state)
    if not basis.contains(occ):
        raise TruncationError(f"state {state.occupations} lies outside local_dim {basis.local_dim}")
    first, last = _boundary_coefficients(params)
    ng = params.n_groups
    e_mu = np.asarray(state.group_energies, dtype=float)

    leakage = 0.0
    blocks: List[Dict[tuple, float]] = []  # calH_mu |a>
    full: Dict[tuple, float] = defaultdict(float)  # (H - H0)|a>
    for mu in range(ng):
        bond, lost = _truncate(_apply_bond(params, occ, mu, first, last), basis.local_dim)
        leakage += lost
        for k, v in bond.items():
            full[k] += v
        block = dict(bond)
        block[occ] = block.get(occ, 0.0) + e_mu[mu]
        blocks.append(block)

    eps_mu = np.array([blocks[mu].get(occ, 0.0) - e_mu[mu] for mu in range(ng)])
    mean_mu = e_mu + eps_mu
    sigma2_mu = np.array([_dot(b, b) for b in blocks]) - mean_mu**2

    def cov(i, j):
        i, j = i % ng, j % ng
        return 2.0 * _dot(blocks[i], blocks[j]) - 2.0 * mean_mu[i] * mean_mu[j]

    sigma2_tilde = np.array([sum(cov(nu - 1, nu) for nu in (mu - 1, mu, mu + 1)) for mu in range(ng)])

    eps_a = full.get(occ, 0.0)
    sigma2_a = _dot(full, full) - eps_a**2
    return MomentSet(
        e_a=state.total_energy,
        eps_a=eps_a,
        sigma2_a=sigma2_a,
        eps_mu=eps_mu,
        sigma2_mu=sigma2_mu,
        sigma2_tilde_mu=sigma2_tilde,
        leakage=leakage,
        leak_tol=leak_tol,
    )


# ---------------------------------------------------------------------------
# closed-form mode sums


def _boundary_second_moments(params: ChainParams, occupations):
    """Per group: <q_last^2>, <q_first^2> and <{q_last, q_first}>/2 in a number state."""
    first, last = _boundary_coefficients(params)
    occ = np.asarray(occupations, dtype=float).reshape(params.n_groups, params.n)
    factor = 2.0 * occ + 1.0  # <(a + a^dag)^2>
    return factor @ (last**2), factor @ (first**2), factor @ (first * last)


def sigma_mode_sum(params: ChainParams, occupations) -> Tuple[np.ndarray, float]:
    """Exact ``sigma_mu^2`` per bond and ``sigma_a^2`` for a product number state.

    No truncation: the bond operators are quadratic, so their second moments
    reduce to sums over modes.
    """
    ll, ff, lf = _boundary_second_moments(params, occupations)
    c2 = params.coupling**2
    nxt = np.roll(np.arange(params.n_groups), -1)
    sigma2_mu = c2 * ll * ff[nxt]
    sigma2_a = float(np.sum(sigma2_mu))
    if params.n_groups == 2:
        # both bonds join the same pair of groups
        sigma2_a += 2.0 * c2 * lf[0] * lf[1]
    return sigma2_mu, sigma2_a


@dataclass(frozen=True)
class SigmaDebyeCheck:
    exact: np.ndarray
    debye_total: np.ndarray  # 4 n^-2 E_mu E_{mu+1}, E_mu including zero-point energy
    debye_thermal: np.ndarray  # same with E_mu measured from the group ground state
    sigma2_a: float

    @property
    def deviation_total(self) -> np.ndarray:
        return np.abs(self.exact - self.debye_total) / self.debye_total

    @property
    def deviation_thermal(self) -> np.ndarray:
        return np.abs(self.exact - self.debye_thermal) / self.debye_thermal


def sigma_debye_check(params: ChainParams, state: OccupationState) -> SigmaDebyeCheck:
    """Compare exact bond variances with the continuum form ``4 n^-2 E_mu E_{mu+1}``.

    The continuum form is reported for both readings of ``E_mu``: with and
    without the zero-point energy of the group.
    """
    exact, s2a = sigma_mode_sum(params, state.occupations)
    e = np.asarray(state.group_energies, dtype=float)
    e_zp = 0.5 * float(np.sum(group_spectrum(params).frequencies))
    n = params.n

    def debye(vals):
        return 4.0 / n**2 * vals * np.roll(vals, -1)

    return SigmaDebyeCheck(exact=exact, debye_total=debye(e), debye_thermal=debye(e - e_zp), sigma2_a=s2a)


# ---------------------------------------------------------------------------
# dense truncated Hamiltonian


def _position_operators(basis: TruncatedBasis):
    """Sparse first- and last-site position operators for every group."""
    params = basis.params
    d = basis.local_dim
    first, last = _boundary_coefficients(params)
    ladder = sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr")
    x_local = ladder + ladder.T
    eye = sp.identity(d, format="csr")
    n_modes = basis.n_modes

    def embed(m):
        op = sp.identity(1, format="csr")
        for k in range(n_modes):
            op = sp.kron(op, x_local if k == m else eye, format="csr")
        return op

    ops = [embed(m) for m in range(n_modes)]
    q_first, q_last = [], []
    for mu in range(params.n_groups):
        block = ops[mu * params.n:(mu + 1) * params.n]
        q_first.append(sum(c * op for c, op in zip(first, block)))
        q_last.append(sum(c * op for c, op in zip(last, block)))
    return q_first, q_last


def hamiltonian(basis: TruncatedBasis) -> np.ndarray:
    """Full chain Hamiltonian projected onto the truncated basis, as a dense matrix."""
    params = basis.params
    q_first, q_last = _position_operators(basis)
    coupling = sp.csr_matrix((basis.dim, basis.dim))
    for mu in range(params.n_groups):
        nxt = (mu + 1) % params.n_groups
        coupling = coupling + params.coupling * (q_last[mu] @ q_first[nxt])
    h = coupling.toarray()
    h[np.diag_indices_from(h)] += basis.diagonal_energies()
    return h


_EIGEN_CACHE: Dict[tuple, tuple] = {}


def eigensystem(basis: TruncatedBasis):
    key = (basis.params, basis.local_dim)
    if key not in _EIGEN_CACHE:
        if len(_EIGEN_CACHE) > 8:
            _EIGEN_CACHE.clear()
        vals, vecs = np.linalg.eigh(hamiltonian(basis))
        vals.setflags(write=False)
        vecs.setflags(write=False)
        _EIGEN_CACHE[key] = (vals, vecs)
    return _EIGEN_CACHE[key]


def _weighted_quantile(x, w, q):
    order = np.argsort(x)
    cw = np.cumsum(w[order])
    return float(np.interp(q * cw[-1], cw, x[order]))


@dataclass(frozen=True)
class WDistribution:
    """Energy distribution of a product state over the chain eigenstates."""

    energies: np.ndarray
    probabilities: np.ndarray  # |<a|phi>|^2 per eigenstate
    bin_edges: np.ndarray
    weights: np.ndarray  # probability mass per bin
    total: float
    mean: float
    variance: float
    skewness: float


def w_distribution(basis: TruncatedBasis, state: OccupationState) -> WDistribution:
    """Weights ``|<a|phi>|^2`` of ``|a>`` over the eigenstates of the truncated chain.

    Moments are taken from the unbinned weights; the histogram uses a
    weighted Freedman-Diaconis bin width.
    """
    vals, vecs = eigensystem(basis)
    p = vecs[basis.index(state), :] ** 2
    total = float(np.sum(p))
    mean = float(np.dot(p, vals)) / total
    dev = vals - mean
    var = float(np.dot(p, dev**2)) / total
    skew = float(np.dot(p, dev**3)) / total / var**1.5 if var > 0 else 0.0

    keep = p > 1e-14 * p.max()
    x, w = vals[keep], p[keep]
    iqr = _weighted_quantile(x, w, 0.75) - _weighted_quantile(x, w, 0.25)
    n_eff = 1.0 / float(np.sum((w / w.sum()) ** 2))
    span = float(x.max() - x.min())
    if iqr > 0 and span > 0:
        nbins = max(1, int(math.ceil(span / (2.0 * iqr * n_eff ** (-1.0 / 3.0)))))
    else:
        nbins = 1
    lo, hi = (x.min(), x.max()) if span > 0 else (x.min() - 0.5, x.max() + 0.5)
    hist, edges = np.histogram(x, bins=nbins, range=(lo, hi), weights=w)
    return WDistribution(
        energies=vals,
        probabilities=p,
        bin_edges=edges,
        weights=hist,
        total=total,
        mean=mean,
        variance=var,
        skewness=skew,
    )


# ---------------------------------------------------------------------------
# diagonal density-matrix formula


def _log_erfc_asymptotic(x: float) -> float:
    # erfc(x) ~ exp(-x^2)/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
    s, term, k = 1.0, 1.0, 0
    inv = 1.0 / (2.0 * x * x)
    while True:
        k += 1
        term *= -(2 * k - 1) * inv
        s += term
        if abs(term) < 1e-18 or k > 60:
            break
    return -x * x - math.log(x * math.sqrt(math.pi)) + math.log(s)


def log_erfc(x: float) -> float:
    """``log(erfc(x))`` without underflow for large positive ``x``."""
    if x > ERFC_ASYMPTOTIC_CUT:
        return _log_erfc_asymptotic(x)
    if x < -ERFC_ASYMPTOTIC_CUT:
        return math.log(2.0)  # erfc(-x) < 1e-270
    return math.log(special.erfc(x))


def log_rho_diagonal(y_a: float, sigma_a: float, beta: float, e0: float) -> float:
    """Logarithm of the unnormalized diagonal density-matrix element."""
    if not sigma_a > 0:
        raise DomainError(f"sigma_a must be positive, got {sigma_a}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    x = (e0 - y_a + beta * sigma_a**2) / (math.sqrt(2.0) * sigma_a)
    return -beta * y_a + 0.5 * beta**2 * sigma_a**2 + log_erfc(x) - math.log(2.0)


def rho_diagonal(y_a: float, sigma_a: float, beta: float, e0: float) -> float:
    """Unnormalized ``<a|rho|a>`` for a Gaussian ``w_a(E)`` cut off at the ground energy ``e0``.

    Equals ``exp(-beta y_a + beta^2 sigma_a^2 / 2) erfc(x) / 2`` with
    ``x = (e0 - y_a + beta sigma_a^2) / (sqrt(2) sigma_a)``; divide by the
    partition sum to normalize.
    """
    return math.exp(log_rho_diagonal(y_a, sigma_a, beta, e0))


# ---------------------------------------------------------------------------
# off-diagonal suppression


@dataclass(frozen=True)
class OffdiagReport:
    max_offdiag: float
    min_diagonal: float
    ratio: float
    pairs: int  # pairs satisfying the energy-gap filter
    retained: int  # states whose sigma_a is free of truncation error


def offdiag_scan(basis: TruncatedBasis, beta: float) -> OffdiagReport:
    """Largest ``|<a|rho|b>|`` among pairs with ``|E_a - E_b| > sigma_a + sigma_b``.

    Only states with every occupation at most ``local_dim - 2`` are retained,
    since only for those does the truncated ``H|a>`` equal the exact one.
    The result is scaled by the smallest retained diagonal element.
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    vals, vecs = eigensystem(basis)
    boltz = np.exp(-beta * (vals - vals[0]))
    rho = (vecs * (boltz / boltz.sum())) @ vecs.T

    h = hamiltonian(basis)
    e_diag = np.diag(h).copy()
    off = h - np.diag(e_diag)
    sigma = np.sqrt(np.einsum("ij,ij->j", off, off) - np.diag(off) ** 2)

    occ = np.array(list(basis.states()))
    retained = np.flatnonzero(occ.max(axis=1) <= basis.local_dim - 2)
    e_r, s_r = e_diag[retained], sigma[retained]
    gap = np.abs(e_r[:, None] - e_r[None, :]) > (s_r[:, None] + s_r[None, :])
    sub = np.abs(rho[np.ix_(retained, retained)])
    pairs = int(np.count_nonzero(np.triu(gap, 1)))
    max_off = float(sub[gap].max()) if pairs else 0.0
    min_diag = float(np.min(np.diag(rho)[retained]))
    return OffdiagReport(max_off, min_diag, max_off / min_diag, pairs, len(retained))


# ---------------------------------------------------------------------------
# state families used by the checks


def vacuum(params: ChainParams) -> OccupationState:
    return state_energy(params, np.zeros((params.n_groups, params.n), dtype=int))


def single_excitations(params: ChainParams) -> List[OccupationState]:
    """The vacuum plus every state with exactly one quantum."""
    out = [vacuum(params)]
    for g in range(params.n_groups):
        for l in range(params.n):
            occ = np.zeros((params.n_groups, params.n), dtype=int)
            occ[g, l] = 1
            out.append(state_energy(params, occ))
    return out


def sample_states_in_range(params: ChainParams, e_min: float, e_max: float, count: int, rng, max_occ: int = 64) -> List[OccupationState]:
    """Random product states whose every group energy lies in ``[e_min, e_max]``.

    Each group is drawn independently by rejection from uniform occupations.
    """
    w = group_spectrum(params).frequencies
    zp = 0.5 * float(np.sum(w))
    if e_max < zp:
        raise DomainError("energy window lies below the group ground-state energy")
    top = int(min(max_occ, math.ceil((e_max - zp) / w[0]))) + 1
    out = []
    for _ in range(count):
        rows = []
        for _g in range(params.n_groups):
            for _try in range(100000):
                row = rng.integers(0, top, size=params.n)
                if e_min <= float((row + 0.5) @ w) <= e_max:
                    break
            else:
                raise DomainError("could not sample a group state inside the energy window")
            rows.append(row)
        out.append(state_energy(params, np.array(rows)))
    return out
