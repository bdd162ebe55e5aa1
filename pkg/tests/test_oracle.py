import math
import sys

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from nanotemp.chain import ChainParams, group_spectrum, state_energy
from nanotemp.errors import DomainError, TruncationError
from nanotemp.oracle import (
    ERFC_ASYMPTOTIC_CUT,
    TruncatedBasis,
    hamiltonian,
    log_erfc,
    log_rho_diagonal,
    moments,
    offdiag_scan,
    rho_diagonal,
    sample_states_in_range,
    sigma_debye_check,
    sigma_mode_sum,
    single_excitations,
    vacuum,
    w_distribution,
)

UNCAPPED = sys.maxsize


def vacuum_boundary_variance(params):
    """<q_1^2> in the ground state of one isolated group, from the dynamical matrix."""
    n, m, w0 = params.n, params.mass, params.omega0
    k = w0**2 * (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))
    cov = np.linalg.inv(scipy.linalg.sqrtm(k).real) / (2 * m)
    return cov[0, 0], cov[-1, -1], cov[0, -1]


def occupations(draw, params, top):
    flat = draw(st.lists(st.integers(0, top), min_size=params.n * params.n_groups, max_size=params.n * params.n_groups))
    return np.array(flat).reshape(params.n_groups, params.n)


class TestBasis:
    def test_cap(self):
        with pytest.raises(TruncationError):
            TruncatedBasis(ChainParams(n=2, n_groups=4), 4)  # 4^8 > 20000
        assert TruncatedBasis(ChainParams(n=2, n_groups=4), 4, max_dim=70000).dim == 65536

    def test_index_roundtrip(self):
        b = TruncatedBasis(ChainParams(n=2, n_groups=2), 3)
        for i, occ in enumerate(b.states()):
            assert b.index(occ) == i

    def test_hamiltonian_symmetric_with_diagonal_h0(self):
        p = ChainParams(n=2, n_groups=3, omega0=1.3, mass=0.7)
        b = TruncatedBasis(p, 3)
        h = hamiltonian(b)
        np.testing.assert_allclose(h, h.T, atol=1e-14)
        s = state_energy(p, [[1, 0], [0, 2], [1, 1]])
        assert h[b.index(s), b.index(s)] == pytest.approx(s.total_energy)

    def test_state_outside(self):
        p = ChainParams(n=1, n_groups=3)
        with pytest.raises(TruncationError):
            moments(TruncatedBasis(p, 3), state_energy(p, [[3], [0], [0]]))


class TestMoments:
    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_first_order_shift_vanishes(self, data):
        p = ChainParams(n=data.draw(st.integers(1, 4)), n_groups=data.draw(st.integers(2, 5)))
        s = state_energy(p, occupations(data.draw, p, 5))
        m = moments(TruncatedBasis(p, 8, UNCAPPED), s)
        np.testing.assert_allclose(m.eps_mu, 0.0, atol=1e-12)
        assert m.eps_a == pytest.approx(0.0, abs=1e-12)
        assert m.y_a == pytest.approx(s.total_energy)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_cross_terms_vanish_from_three_groups(self, data):
        p = ChainParams(n=data.draw(st.integers(1, 4)), n_groups=data.draw(st.integers(3, 6)))
        s = state_energy(p, occupations(data.draw, p, 5))
        m = moments(TruncatedBasis(p, 8, UNCAPPED), s)
        np.testing.assert_allclose(m.sigma2_tilde_mu, 0.0, atol=1e-10)
        assert m.sigma2_mu.sum() == pytest.approx(m.sigma2_a, rel=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_agrees_with_mode_sums(self, data):
        p = ChainParams(n=data.draw(st.integers(1, 4)), n_groups=data.draw(st.integers(2, 5)), omega0=1.7, mass=0.4)
        s = state_energy(p, occupations(data.draw, p, 5))
        m = moments(TruncatedBasis(p, 8, UNCAPPED), s)
        assert not m.leaked
        s2mu, s2a = sigma_mode_sum(p, s.occupations)
        assert m.sigma2_a == pytest.approx(s2a, rel=1e-10)
        if p.n_groups > 2:
            np.testing.assert_allclose(m.sigma2_mu, s2mu, rtol=1e-10)

    def test_two_groups_double_bond(self):
        # both bonds join the same two groups, so their covariance survives
        p = ChainParams(n=1, n_groups=2)
        m = moments(TruncatedBasis(p, 4), vacuum(p))
        x2 = 1 / (2 * math.sqrt(2))  # <q^2> of one site
        np.testing.assert_allclose(m.sigma2_mu, x2**2)
        assert m.sigma2_a == pytest.approx(4 * x2**2, rel=1e-14)
        assert m.sigma2_a == pytest.approx(2 * m.sigma2_mu.sum(), rel=1e-14)
        assert np.all(m.sigma2_tilde_mu > 0.1)

    @pytest.mark.parametrize("n", [1, 3, 8, 40])
    def test_vacuum_against_dynamical_matrix(self, n):
        p = ChainParams(n=n, n_groups=4, omega0=1.3, mass=2.0)
        first, last, _ = vacuum_boundary_variance(p)
        expected = (p.mass * p.omega0**2) ** 2 * first * last
        s2mu, s2a = sigma_mode_sum(p, np.zeros((4, n), dtype=int))
        np.testing.assert_allclose(s2mu, expected, rtol=1e-10)
        if n <= 3:
            m = moments(TruncatedBasis(p, 3, UNCAPPED), vacuum(p))
            np.testing.assert_allclose(m.sigma2_mu, expected, rtol=1e-10)

    def test_vacuum_floor(self):
        # the vacuum bond variance stays finite as n grows: (4 omega0 / 3 pi)^2
        vals = [sigma_mode_sum(ChainParams(n=n, n_groups=3), np.zeros((3, n), dtype=int))[0][0] for n in (16, 128, 1024, 8192)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] == pytest.approx((4 / (3 * math.pi)) ** 2, rel=1e-6)

    def test_leakage_flag(self):
        p = ChainParams(n=1, n_groups=3)
        s = state_energy(p, [[3], [0], [0]])
        m = moments(TruncatedBasis(p, 4), s)
        assert m.leaked
        assert m.sigma2_a < sigma_mode_sum(p, s.occupations)[1]

    @pytest.mark.parametrize("n,ng,d", [(1, 3, 4), (2, 3, 3), (2, 2, 4)])
    def test_truncation_convergence(self, n, ng, d):
        p = ChainParams(n=n, n_groups=ng)
        for s in single_excitations(p):
            a = moments(TruncatedBasis(p, d, UNCAPPED), s)
            b = moments(TruncatedBasis(p, d + 1, UNCAPPED), s)
            assert not a.leaked
            assert b.sigma2_a == pytest.approx(a.sigma2_a, rel=1e-6)
            np.testing.assert_allclose(b.sigma2_mu, a.sigma2_mu, rtol=1e-6)


class TestSigmaDebye:
    @pytest.mark.parametrize("eps", [5.0, 20.0, 50.0])
    def test_deviation_shrinks_with_group_size(self, eps):
        # fixed excitation energy per site, placed in the lowest mode of every group
        devs = []
        for n in (8, 16, 32, 64):
            p = ChainParams(n=n, n_groups=3)
            w1 = group_spectrum(p).frequencies[0]
            occ = np.zeros((3, n), dtype=int)
            occ[:, 0] = round(n * eps / w1)
            check = sigma_debye_check(p, state_energy(p, occ))
            devs.append(check.deviation_total[0])
        assert np.all(np.diff(devs) < 0)

    def test_residual_is_zero_point(self):
        # lowest-mode excitation: exact -> (2 eps + 4/(3 pi))^2, continuum -> (2 eps + 4/pi)^2
        eps, n = 20.0, 4096
        p = ChainParams(n=n, n_groups=3)
        w1 = group_spectrum(p).frequencies[0]
        occ = np.zeros((3, n), dtype=int)
        occ[:, 0] = round(n * eps / w1)
        c = sigma_debye_check(p, state_energy(p, occ))
        e = c.debye_thermal[0] ** 0.5  # 2 * (excitation per site)
        assert c.exact[0] == pytest.approx((e + 4 / (3 * math.pi)) ** 2, rel=2e-3)
        assert c.debye_total[0] == pytest.approx((e + 4 / math.pi) ** 2, rel=2e-3)

    def test_vacuum_scaling(self):
        for n in (512, 4096):
            c = sigma_debye_check(ChainParams(n=n, n_groups=3), vacuum(ChainParams(n=n, n_groups=3)))
            assert c.exact[0] == pytest.approx(16 / (9 * math.pi**2), rel=5e-3)
            assert c.debye_total[0] == pytest.approx(16 / math.pi**2, rel=5e-3)

    def test_additive(self):
        p = ChainParams(n=6, n_groups=5)
        rng = np.random.default_rng(3)
        c = sigma_debye_check(p, state_energy(p, rng.integers(0, 4, (5, 6))))
        assert c.sigma2_a == pytest.approx(c.exact.sum(), rel=1e-14)


class TestWDistribution:
    @pytest.mark.parametrize("n,ng,d", [(1, 2, 4), (1, 3, 5), (2, 2, 4), (1, 4, 4)])
    def test_spectral_identities(self, n, ng, d):
        p = ChainParams(n=n, n_groups=ng, omega0=0.8)
        b = TruncatedBasis(p, d)
        for s in single_excitations(p):
            m = moments(b, s)
            w = w_distribution(b, s)
            assert w.total == pytest.approx(1.0, abs=1e-9)
            assert w.weights.sum() == pytest.approx(w.total, rel=1e-9)
            assert np.all(w.probabilities >= 0)
            assert w.mean == pytest.approx(m.y_a, rel=1e-8)
            assert w.variance == pytest.approx(m.sigma2_a, rel=1e-8)
            assert len(w.bin_edges) == len(w.weights) + 1

    def test_skewness_falls_beyond_four_groups(self):
        skews = []
        for ng in (4, 5):
            p = ChainParams(n=1, n_groups=ng)
            skews.append(abs(w_distribution(TruncatedBasis(p, 4), vacuum(p)).skewness))
        # vacuum: 8 / sqrt(N_G) for N_G >= 4
        np.testing.assert_allclose(skews, [8 / 2, 8 / math.sqrt(5)], rtol=1e-8)


class TestRhoDiagonal:
    def test_narrow_above_ground(self):
        y, beta, e0 = 5.0, 0.7, 1.0
        assert rho_diagonal(y, 1e-6, beta, e0) == pytest.approx(math.exp(-beta * y), rel=1e-9)

    def test_narrow_below_ground(self):
        assert rho_diagonal(1.0, 1e-3, 0.7, 5.0) == 0.0

    def test_matches_truncated_gaussian_integral(self):
        y, sig, beta, e0 = 3.0, 1.2, 0.8, 1.5
        with mpmath.workdps(30):
            gauss = lambda E: mpmath.exp(-((E - y) ** 2) / (2 * sig**2)) / (mpmath.sqrt(2 * mpmath.pi) * sig)
            integral = mpmath.quad(lambda E: gauss(E) * mpmath.exp(-beta * E), [e0, y, mpmath.inf])
        assert rho_diagonal(y, sig, beta, e0) == pytest.approx(float(integral), rel=1e-12)

    @pytest.mark.parametrize("x", np.linspace(20.01, 29.99, 23))
    def test_log_branch_against_extended_precision(self, x):
        with mpmath.workdps(50):
            exact = mpmath.log(mpmath.erfc(x))
        assert log_erfc(x) == pytest.approx(float(exact), rel=1e-13)
        # relative error of the weight itself
        assert abs(math.expm1(log_erfc(x) - float(exact))) < 1e-10

    def test_branches_meet(self):
        lo = log_erfc(ERFC_ASYMPTOTIC_CUT - 1e-9)
        hi = log_erfc(ERFC_ASYMPTOTIC_CUT + 1e-9)
        assert hi == pytest.approx(lo, rel=1e-9)
        assert log_erfc(-30.0) == pytest.approx(math.log(2.0))

    def test_no_overflow(self):
        # erfc argument ~ 700: direct evaluation underflows
        lw = log_rho_diagonal(y_a=0.0, sigma_a=10.0, beta=100.0, e0=0.0)
        assert math.isfinite(lw)

    @pytest.mark.parametrize("sig,beta", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
    def test_domain(self, sig, beta):
        with pytest.raises(DomainError):
            rho_diagonal(1.0, sig, beta, 0.0)


class TestOffdiag:
    p = ChainParams(n=1, n_groups=3)

    def test_infinite_temperature(self):
        rep = offdiag_scan(TruncatedBasis(self.p, 4), 0.0)
        assert rep.max_offdiag < 1e-14
        assert rep.min_diagonal == pytest.approx(1 / 64, rel=1e-12)

    def test_suppressed_at_high_temperature(self):
        assert offdiag_scan(TruncatedBasis(self.p, 4), 0.2).ratio < 1.0

    def test_pair_filter(self):
        b = TruncatedBasis(self.p, 4)
        rep = offdiag_scan(b, 0.2)
        kept = [s for s in b.states() if max(s) <= 2]
        stats = []
        for occ in kept:
            s = state_energy(self.p, [[v] for v in occ])
            stats.append((s.total_energy, math.sqrt(moments(b, s).sigma2_a)))
        brute = sum(
            1 for i in range(len(stats)) for j in range(i + 1, len(stats))
            if abs(stats[i][0] - stats[j][0]) > stats[i][1] + stats[j][1]
        )
        assert rep.retained == len(kept)
        assert rep.pairs == brute


class TestVarianceGrowth:
    def test_sampled_states_stay_in_window(self):
        p = ChainParams(n=3, n_groups=4)
        rng = np.random.default_rng(1)
        for s in sample_states_in_range(p, 4.0, 9.0, 30, rng):
            assert np.all((s.group_energies >= 4.0) & (s.group_energies <= 9.0))

    def test_window_below_ground(self):
        with pytest.raises(DomainError):
            sample_states_in_range(ChainParams(n=3, n_groups=4), 0.0, 0.1, 1, np.random.default_rng(0))

    def test_per_group_variance_bounded_below(self):
        rng = np.random.default_rng(11)
        floor = np.inf
        for ng in (2, 3, 4, 5):
            p = ChainParams(n=1, n_groups=ng)
            for s in sample_states_in_range(p, 0.7, 6.0, 40, rng):
                floor = min(floor, sigma_mode_sum(p, s.occupations)[1] / ng)
        # vacuum bond variance (1 / (2 sqrt 2))^2 is the smallest possible
        assert floor >= 1 / 8 - 1e-12
