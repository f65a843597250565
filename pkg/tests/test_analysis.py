import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import comb

from rissim.analysis import (
    SISO_VERBATIM_MU,
    CompositeStats,
    PepInstance,
    abep_bound,
    cpep,
    estimate_mu,
    mgf_quadratic_form,
    mu_formula,
    mu_statistics,
    omega_quadratic_form,
    pep,
    q_function,
    vec,
)
from rissim.transceiver import build_codebook

from conftest import crandn


def dense_mgf(s, stats, inst, ordering):
    """Resolvent form built from full Tx*Rx matrices."""
    B = inst.B(ordering)
    n = B.shape[0]
    zbar = stats.mean_vector
    A = np.eye(n) - s * stats.covariance @ B
    quad = zbar.conj() @ B @ np.linalg.solve(A, zbar)
    return float((np.exp(s * quad) / np.linalg.det(A)).real)


def dense_pep(x, x_hat, stats, N0, ordering):
    inst = PepInstance.from_pair(x, x_hat, stats.rx)
    f = lambda t: dense_mgf(-1 / (4 * N0 * math.sin(t) ** 2), stats, inst, ordering)
    val, _ = integrate.quad(f, 0, math.pi / 2, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val / math.pi


def rayleigh_pep(gamma, L):
    """(1/pi) int (1 + gamma / sin^2)^-L, closed form for L-fold diversity."""
    nu = math.sqrt(gamma / (1 + gamma))
    return ((1 - nu) / 2) ** L * sum(comb(L - 1 + k, k) * ((1 + nu) / 2) ** k for k in range(L))


class TestMuFormula:
    def test_values(self):
        assert mu_formula(1, 1) == pytest.approx(0.2, abs=1e-15)
        assert mu_formula(2, 4) == pytest.approx(0.04, abs=1e-15)
        assert mu_formula(4, 4) == pytest.approx(1.8 / 81, abs=1e-15)
        assert mu_formula(2, 2) == pytest.approx(0.072, abs=1e-15)

    def test_siso_oracle_constant(self):
        assert SISO_VERBATIM_MU == pytest.approx((math.sqrt(math.pi) / 2 * 0.5) ** 2, abs=1e-16)
        assert SISO_VERBATIM_MU == pytest.approx(0.196349540849362, abs=1e-15)

    def test_rejects(self):
        with pytest.raises(ValueError):
            mu_formula(0, 1)

    def test_estimate_siso(self):
        est = mu_statistics(1, 1, 200_000, np.random.default_rng(5))
        assert abs(est.mean.real - SISO_VERBATIM_MU) < 3 * est.stderr_real
        assert abs(est.mean.imag) < 3 * est.stderr_imag

    def test_estimate_2x2(self):
        est = estimate_mu(2, 2, 100_000, np.random.default_rng(6))
        assert est.real == pytest.approx(mu_formula(2, 2), rel=0.10)

    def test_estimate_needs_trials(self):
        with pytest.raises(ValueError):
            estimate_mu(1, 1, 100, np.random.default_rng(0))

    def test_signed_variant_is_larger(self):
        r = np.random.default_rng(7)
        v = mu_statistics(1, 1, 50_000, r, "verbatim").mean.real
        s = mu_statistics(1, 1, 50_000, r, "signed").mean.real
        # full co-phasing: E|h| E|g| = pi/4
        assert s == pytest.approx(math.pi / 4, rel=0.02)
        assert s > v


class TestQuadraticForm:
    @settings(max_examples=80, deadline=None)
    @given(Tx=st.integers(1, 4), Rx=st.integers(1, 4), seed=st.integers(0, 2**32 - 1),
           ordering=st.sampled_from(["colmajor", "rowmajor"]))
    def test_omega_identity(self, Tx, Rx, seed, ordering):
        r = np.random.default_rng(seed)
        C = crandn(r, Rx, Tx)
        x, xh = crandn(r, Tx), crandn(r, Tx)
        direct = np.sum(np.abs(C @ (x - xh)) ** 2)
        assert omega_quadratic_form(C, x, xh, ordering) == pytest.approx(direct, rel=1e-10)

    def test_vec(self):
        A = np.array([[1, 2], [3, 4]])
        np.testing.assert_array_equal(vec(A), [1, 3, 2, 4])
        np.testing.assert_array_equal(vec(A, "rowmajor"), [1, 2, 3, 4])
        with pytest.raises(ValueError):
            vec(A, "diagonal")

    def test_identical_pair_rejected(self):
        with pytest.raises(ValueError):
            PepInstance.from_pair([1, 1], [1, 1], 2)

    def test_delta_rank_one(self, rng):
        inst = PepInstance.from_pair(crandn(rng, 3), crandn(rng, 3), 2)
        assert np.sum(inst.eigvals > 1e-12 * inst.eigvals.max()) == 1
        np.testing.assert_allclose(inst.delta, inst.delta.conj().T)


class TestMgf:
    def test_zero(self, rng):
        stats = CompositeStats.from_formula(2, 3, 16)
        inst = PepInstance.from_pair(crandn(rng, 2), crandn(rng, 2), 3)
        assert mgf_quadratic_form(0.0, stats, inst) == 1.0

    def test_scalar_reduction(self):
        stats = CompositeStats(0.2, 8, 1, 1)
        inst = PepInstance.from_pair([1], [-1], 1)
        s, delta, mu, N = -0.05, 4.0, 0.2, 8
        expected = math.exp(s * mu**2 * N**2 * delta / (1 - s * N * delta)) / (1 - s * N * delta)
        assert mgf_quadratic_form(s, stats, inst) == pytest.approx(expected, rel=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(Tx=st.integers(1, 4), Rx=st.integers(1, 4), N=st.integers(1, 64),
           s=st.floats(-5, 0), seed=st.integers(0, 2**32 - 1))
    def test_matches_dense_resolvent(self, Tx, Rx, N, s, seed):
        r = np.random.default_rng(seed)
        stats = CompositeStats.from_formula(Tx, Rx, N)
        inst = PepInstance.from_pair(crandn(r, Tx), crandn(r, Tx), Rx)
        ref = {o: dense_mgf(s, stats, inst, o) for o in ("rowmajor", "colmajor")}
        assert ref["rowmajor"] == pytest.approx(ref["colmajor"], rel=1e-12, abs=1e-300)
        assert mgf_quadratic_form(s, stats, inst) == pytest.approx(ref["rowmajor"], rel=1e-10, abs=1e-300)

    @settings(max_examples=60, deadline=None)
    @given(Tx=st.integers(1, 4), Rx=st.integers(1, 4), N=st.integers(1, 64),
           s=st.floats(-10, -1e-6), seed=st.integers(0, 2**32 - 1))
    def test_below_one(self, Tx, Rx, N, s, seed):
        r = np.random.default_rng(seed)
        inst = PepInstance.from_pair(crandn(r, Tx), crandn(r, Tx), Rx)
        assert mgf_quadratic_form(s, CompositeStats.from_formula(Tx, Rx, N), inst) < 1.0

    def test_sampling_oracle(self):
        r = np.random.default_rng(12)
        Tx, Rx, N = 2, 2, 4
        stats = CompositeStats.from_formula(Tx, Rx, N)
        x, xh = np.array([1, 1]), np.array([-1, 1])
        inst = PepInstance.from_pair(x, xh, Rx)
        n = 1_000_000
        C = stats.mu * N + math.sqrt(N) * crandn(r, n, Rx, Tx)
        omega = np.sum(np.abs(C @ (x - xh)) ** 2, axis=1)
        mc = np.mean(np.exp(-0.3 * omega))
        assert mgf_quadratic_form(-0.3, stats, inst) == pytest.approx(mc, rel=0.02)

    def test_singular_rejected(self):
        stats = CompositeStats(0.2, 1, 1, 1)
        inst = PepInstance.from_pair([1], [-1], 1)
        with pytest.raises(ValueError):
            mgf_quadratic_form(0.25, stats, inst)


class TestPep:
    def test_zero_snr_limit(self):
        stats = CompositeStats.from_formula(2, 2, 16)
        assert pep([1, 1], [-1, 1], stats, 1e18) == pytest.approx(0.5, abs=1e-9)

    def test_order_rejected(self):
        with pytest.raises(ValueError):
            pep([1], [-1], CompositeStats.from_formula(1, 1, 4), 1.0, quadrature_order=4)

    @pytest.mark.parametrize("Rx", [1, 2, 4])
    @pytest.mark.parametrize("N0", [0.1, 1.0, 10.0])
    def test_rayleigh_closed_form(self, Rx, N0):
        # vanishing mean: Omega = N |d|^2 chi^2 with Rx complex degrees of freedom
        stats = CompositeStats(1e-12, 16, 1, Rx)
        gamma = 16 * 4 / (4 * N0)
        assert pep([1], [-1], stats, N0) == pytest.approx(rayleigh_pep(gamma, Rx), rel=1e-9)

    @pytest.mark.parametrize("ordering", ["rowmajor", "colmajor"])
    def test_adaptive_quadrature_oracle(self, ordering):
        stats = CompositeStats.from_formula(2, 3, 8)
        x, xh = np.array([1, 1j]), np.array([-1, 1j])
        N0 = 10 ** 0.5
        assert pep(x, xh, stats, N0) == pytest.approx(dense_pep(x, xh, stats, N0, ordering), rel=1e-9)

    def test_ordering_invariance(self):
        stats = CompositeStats.from_formula(2, 2, 16)
        x, xh = np.array([1, -1]), np.array([-1, -1])
        a = dense_pep(x, xh, stats, 1.0, "rowmajor")
        b = dense_pep(x, xh, stats, 1.0, "colmajor")
        assert a == pytest.approx(b, rel=1e-12)

    def test_cpep_averaging_oracle(self):
        r = np.random.default_rng(13)
        Tx, Rx, N = 2, 2, 16
        stats = CompositeStats.from_formula(Tx, Rx, N)
        x, xh = np.array([1, 1]), np.array([-1, 1])
        N0 = 1.0
        C = stats.mu * N + math.sqrt(N) * crandn(r, 1_000_000, Rx, Tx)
        omega = np.sum(np.abs(C @ (x - xh)) ** 2, axis=1)
        mc = np.mean(q_function(np.sqrt(omega / (2 * N0))))
        assert pep(x, xh, stats, N0) == pytest.approx(mc, rel=0.02)

    def test_quadrature_convergence(self, rng):
        for Tx, Rx, N, N0 in [(1, 1, 4, 1.0), (2, 4, 32, 0.05), (4, 2, 16, 0.1), (4, 4, 64, 0.01)]:
            stats = CompositeStats.from_formula(Tx, Rx, N)
            x, xh = crandn(rng, Tx), crandn(rng, Tx)
            a = pep(x, xh, stats, N0, 64)
            b = pep(x, xh, stats, N0, 128)
            assert abs(a - b) < 1e-8 * b

    @settings(max_examples=50, deadline=None)
    @given(Tx=st.integers(1, 4), Rx=st.integers(1, 4), N=st.integers(1, 64),
           snr_db=st.floats(-20, 20), seed=st.integers(0, 2**32 - 1))
    def test_range_and_monotone(self, Tx, Rx, N, snr_db, seed):
        r = np.random.default_rng(seed)
        x, xh = crandn(r, Tx), crandn(r, Tx)
        N0 = 10 ** (-snr_db / 10)
        stats = CompositeStats.from_formula(Tx, Rx, N)
        p = pep(x, xh, stats, N0)
        assert 0 < p <= 0.5
        assert pep(x, xh, stats, N0 / 1.5) < p
        assert pep(x, xh, CompositeStats.from_formula(Tx, Rx, N + 1), N0) < p


class TestCpep:
    def test_null_space(self):
        C = np.array([[1.0, 1.0]])
        assert cpep([1, -1], [0, 0], C, 1.0) == 0.5

    def test_q_of_one(self):
        # Omega = 4, N0 = 2 -> Q(1)
        assert cpep([1], [-1], np.array([[1.0]]), 2.0) == pytest.approx(0.158655253931457, rel=1e-12)

    def test_q_function(self):
        assert q_function(0.0) == 0.5
        assert q_function(1.0) == pytest.approx(0.158655253931457, rel=1e-12)
        assert q_function(3.0) == pytest.approx(1.3498980316301e-3, rel=1e-10)


def brute_abep(book, stats, N0):
    total = 0.0
    for i in range(book.size):
        for j in range(book.size):
            if i != j:
                total += pep(book.vectors[i], book.vectors[j], stats, N0) * book.hamming_table()[i, j]
    return total / (book.kappa * 2**book.kappa)


class TestAbep:
    def test_single_pair(self):
        book = build_codebook("mimo", 1, 2)
        stats = CompositeStats.from_formula(1, 1, 8)
        assert abep_bound(book, stats, 0.5) == pytest.approx(pep([1], [-1], stats, 0.5), rel=1e-14)

    @pytest.mark.parametrize("scheme,Tx,M", [("mimo", 2, 2), ("sm", 4, 2), ("mimo", 2, 4), ("sm", 2, 4)])
    def test_zero_snr_limit(self, scheme, Tx, M):
        book = build_codebook(scheme, Tx, M)
        stats = CompositeStats.from_formula(Tx, 2, 16)
        limit = book.hamming_table().sum() / 2 / (book.kappa * 2**book.kappa)
        assert abep_bound(book, stats, 1e18) == pytest.approx(limit, rel=1e-8)

    @pytest.mark.parametrize("scheme,Tx,M", [("mimo", 2, 2), ("sm", 4, 2), ("mimo", 2, 4), ("sm", 2, 4)])
    def test_cache_matches_bruteforce(self, scheme, Tx, M):
        book = build_codebook(scheme, Tx, M)
        stats = CompositeStats.from_formula(Tx, 2, 16)
        assert abep_bound(book, stats, 0.2) == pytest.approx(brute_abep(book, stats, 0.2), rel=1e-12)

    def test_can_exceed_one(self):
        book = build_codebook("mimo", 2, 16)
        stats = CompositeStats.from_formula(2, 1, 1)
        assert abep_bound(book, stats, 100.0) > 1.0

    def test_needs_two_codewords(self):
        from rissim.transceiver import Codebook
        book = Codebook("mimo", np.ones((1, 1), complex), np.zeros((1, 1), np.int8))
        with pytest.raises(ValueError):
            abep_bound(book, CompositeStats.from_formula(1, 1, 1), 1.0)

    def test_stats_validation(self):
        with pytest.raises(ValueError):
            CompositeStats(0.0, 4, 1, 1)
        with pytest.raises(ValueError):
            CompositeStats(0.2, 0, 1, 1)
        s = CompositeStats.from_formula(2, 2, 8)
        np.testing.assert_allclose(s.mean_vector, 0.072 * 8)
        np.testing.assert_array_equal(s.covariance, 8 * np.eye(4))
