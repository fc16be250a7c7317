import math

import numpy as np
import pytest
from scipy.linalg import expm, toeplitz
from scipy.special import gamma as gamma_fn

from carfima import (
    CarfimaModel,
    CarfimaError,
    DomainError,
    RepeatedEigenvaluesError,
    SingularLyapunovError,
    acf_carma,
    acf_closed_form,
    acf_integral_form,
    acf_tail_asymptote,
    autocovariance,
    cov_y0_fbm,
    prepare,
    vstar,
    vstar_integral,
)
from carfima.acf import AcfTable
from carfima.fgn import simulate_fgn

from conftest import car1, model_from_eigenvalues, random_stable_model


class TestVstar:
    def test_scalar_ou(self):
        m = car1(0.5)
        parts = prepare(m)
        assert vstar(parts.sys, m).Vstar[0, 0] == pytest.approx(0.5)

    @pytest.mark.parametrize("a,sigma", [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)])
    def test_scalar_general(self, a, sigma):
        m = car1(0.5, a1=-a, sigma=sigma)
        parts = prepare(m)
        assert vstar(parts.sys, m).Vstar[0, 0] == pytest.approx(sigma**2 / (2 * a))

    def test_kronecker_matches_integral_oracle(self):
        m = CarfimaModel(p=2, q=0, alpha=(0.0, -2.0, -3.0), beta=(), H=0.5, sigma=1.0)
        parts = prepare(m)
        V = vstar(parts.sys, m).Vstar
        Vq = vstar_integral(parts.sys, m)
        assert np.max(np.abs(V - Vq)) < 1e-8

    def test_psd_and_residual(self, rng):
        for _ in range(10):
            m = random_stable_model(rng)
            parts = prepare(m)
            V = vstar(parts.sys, m).Vstar
            assert np.min(np.linalg.eigvalsh(V)) > -1e-10 * np.max(np.abs(V))
            resid = parts.sys.A @ V + V @ parts.sys.A.T \
                + m.sigma**2 * np.outer(parts.sys.delta_p, parts.sys.delta_p)
            assert np.max(np.abs(resid)) < 1e-8 * m.sigma**2

    def test_singular_lyapunov(self):
        # eigenvalues exactly +-1: lambda_i + lambda_j = 0, Kronecker system singular
        m = CarfimaModel(p=2, q=0, alpha=(0.0, 1.0, 0.0), beta=(), H=0.5, sigma=1.0)
        parts = prepare(m)
        with pytest.raises(SingularLyapunovError):
            vstar(parts.sys, m)


class TestClosedForm:
    def test_car1_variance_H07(self):
        # sigma^2/2 Gamma(2H+1) * [1/(1*2)] * 2 = Gamma(2.4)/2
        got = acf_closed_form(car1(0.7), 0.0)
        assert got == pytest.approx(gamma_fn(2.4) / 2, rel=1e-12)
        assert got == pytest.approx(0.6210846722521527, rel=1e-12)

    def test_matches_quadrature_per_lag(self, rng):
        for _ in range(6):
            m = random_stable_model(rng)
            parts = prepare(m)
            for h in (0.0, 0.1, 1.0, 5.0):
                c = acf_closed_form(m, h, parts)
                q = acf_integral_form(m, h, parts)
                assert abs(c - q) <= 1e-6 * max(abs(c), 1e-10)

    def test_near_half_continuity(self):
        # one-sided gap is the true dH derivative, ~4.4e-5 relative here
        ref = acf_carma(car1(0.5), 1.0)
        for H in (0.5 - 1e-5, 0.5 + 1e-5):
            assert acf_closed_form(car1(H), 1.0) == pytest.approx(ref, rel=1e-4)

    def test_repeated_eigenvalues_refused(self):
        m = CarfimaModel(p=2, q=0, alpha=(0.0, -1.0, -2.0), beta=(), H=0.7, sigma=1.0)
        with pytest.raises(RepeatedEigenvaluesError):
            acf_closed_form(m, 1.0)

    def test_nonstationary_refused(self):
        m = car1(0.7, a1=1.0)
        with pytest.raises(DomainError):
            acf_closed_form(m, 0.0)

    def test_complex_eigenvalues_give_real_values(self):
        m = model_from_eigenvalues([-0.4 + 1.8j, -0.4 - 1.8j], q=1, beta=(0.3,), H=0.3)
        parts = prepare(m)
        for h in (0.0, 0.5, 2.0, 9.0):
            c = acf_closed_form(m, h, parts)
            q = acf_integral_form(m, h, parts)
            assert abs(c - q) <= 1e-6 * max(abs(c), 1e-10)


class TestIntegralForm:
    def test_carma_case_matches_matrix_form(self, rng):
        for _ in range(4):
            m = random_stable_model(rng, H=0.5)
            parts = prepare(m)
            V = vstar(parts.sys, m).Vstar
            for h in (0.0, 0.7, 3.0):
                direct = parts.sys.beta_vec @ expm(parts.sys.A * h) @ V @ parts.sys.beta_vec
                assert acf_integral_form(m, h, parts) == pytest.approx(direct, rel=1e-8)

    def test_large_lag_negative_for_antipersistent(self):
        m = car1(0.3)
        assert acf_integral_form(m, 40.0) < 0.0

    def test_h_negative_rejected(self):
        with pytest.raises(DomainError):
            acf_integral_form(car1(0.3), -1.0)


class TestCarma:
    def test_ou_values(self, ou_model):
        assert acf_carma(ou_model, 0.0) == pytest.approx(0.5)
        assert acf_carma(ou_model, 1.0) == pytest.approx(0.5 * math.exp(-1), rel=1e-12)

    def test_eigen_form_agreement_p2(self):
        m = model_from_eigenvalues([-1.0, -2.0], H=0.5)
        parts = prepare(m)
        got = acf_carma(m, 0.0, parts)
        # sigma^2 sum_i beta(l)beta(-l)/(alpha'(l)alpha(-l)) at h=0
        eig = 0.0
        for lam in (-1.0, -2.0):
            a1 = 2 * lam + 3
            a_neg = lam**2 - 3 * lam + 2
            eig += 1.0 / (a1 * a_neg)
        assert got == pytest.approx(eig, rel=1e-9)

    def test_requires_half(self):
        with pytest.raises(DomainError):
            acf_carma(car1(0.7), 1.0)


class TestTailAsymptote:
    def test_sign_negative_below_half(self):
        m = car1(0.3)
        for h in (1.0, 10.0, 500.0):
            assert acf_tail_asymptote(m, h) < 0

    def test_value_H07(self):
        # 0.28 * 100^{-0.6}, computed two independent ways
        got = acf_tail_asymptote(car1(0.7), 100.0)
        assert got == pytest.approx(0.0176668056454454, rel=1e-12)
        assert got == pytest.approx(0.28 * math.exp(-0.6 * math.log(100)), rel=1e-12)

    def test_half_rejected(self):
        with pytest.raises(DomainError):
            acf_tail_asymptote(car1(0.5), 10.0)

    def test_closed_form_converges_to_asymptote(self):
        m = car1(0.7)
        r100 = acf_closed_form(m, 100.0) / acf_tail_asymptote(m, 100.0)
        r800 = acf_closed_form(m, 800.0) / acf_tail_asymptote(m, 800.0)
        assert abs(r800 - 1) < abs(r100 - 1)
        assert abs(r800 - 1) < 2e-4


class TestCovY0Fbm:
    def test_t_zero(self):
        assert cov_y0_fbm(car1(0.7), 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_brownian_independence(self, ou_model):
        for t in (0.5, 1.0, 4.0):
            assert cov_y0_fbm(ou_model, t) == pytest.approx(0.0, abs=1e-10)

    def test_alpha0_required(self):
        with pytest.raises(DomainError):
            cov_y0_fbm(car1(0.7, a0=1.0), 1.0)

    def test_monte_carlo_oracle(self):
        # Simulate the stationary CAR(1) state with fGn forcing, then
        # correlate Y at the end of a long warmup with the ensuing fBm.
        H, lam, sigma, t = 0.7, -1.0, 1.0, 1.0
        m = car1(H)
        theory = cov_y0_fbm(m, t)
        dt = 0.05
        warm = int(40 / dt)
        extra = int(t / dt)
        total = warm + extra
        n_paths = 3000
        rng = np.random.default_rng(77)
        prop = math.exp(lam * dt)
        half = math.exp(lam * dt / 2)
        y0 = np.zeros(n_paths)
        bt = np.zeros(n_paths)
        for i in range(n_paths):
            db = simulate_fgn(H, total, dt, rng)
            x = 0.0
            for k in range(warm):
                x = prop * x + sigma * half * db[k]
            y0[i] = x
            bt[i] = db[warm:].sum()
        prods = y0 * bt
        est = prods.mean()
        se = prods.std(ddof=1) / math.sqrt(n_paths)
        assert abs(est - theory) < 3 * se + 0.02 * abs(theory)


class TestAutocovarianceTable:
    def test_dispatch_closed_form(self):
        t = autocovariance(car1(0.7), [0.0, 1.0, 2.0])
        assert t.method == "closed_form"
        assert t.values[0] == pytest.approx(gamma_fn(2.4) / 2)

    def test_dispatch_carma(self, ou_model):
        t = autocovariance(ou_model, [0.0, 1.0])
        assert t.method == "carma_exact"

    def test_dispatch_near_half_warns(self):
        with pytest.warns(UserWarning, match="CARMA"):
            t = autocovariance(car1(0.5 + 1e-7), [0.0, 1.0])
        assert t.method == "carma_exact"
        assert t.values[0] == pytest.approx(0.5)

    def test_dispatch_repeated_eigenvalues_warns(self):
        m = CarfimaModel(p=2, q=0, alpha=(0.0, -1.0, -2.0), beta=(), H=0.7, sigma=1.0)
        with pytest.warns(UserWarning, match="quadrature"):
            t = autocovariance(m, [0.0, 1.0])
        assert t.method == "quadrature"

    def test_lag_zero_dominance(self, rng):
        for _ in range(5):
            m = random_stable_model(rng)
            t = autocovariance(m, np.linspace(0, 20, 41))
            assert t.values[0] >= 0
            assert np.all(np.abs(t.values) <= t.values[0] * (1 + 1e-10))

    def test_toeplitz_psd_with_tiny_jitter(self):
        for H in (0.2, 0.7):
            t = autocovariance(car1(H), np.arange(256) * 0.1)
            cov = toeplitz(t.values)
            jitter = 1e-10 * t.values[0]
            np.linalg.cholesky(cov + jitter * np.eye(256))

    def test_tail_slope_matches_power_law(self):
        for H in (0.2, 0.7):
            m = car1(H)
            hs = np.geomspace(100, 1000, 12)
            vals = np.array([acf_closed_form(m, h) for h in hs])
            slope = np.polyfit(np.log(hs), np.log(np.abs(vals)), 1)[0]
            assert abs(slope - (2 * H - 2)) < 0.05

    def test_antipersistent_sign(self):
        m = car1(0.3)
        for h in (50.0, 120.0, 400.0):
            assert acf_closed_form(m, h) < 0

    def test_csv_round_trip(self, tmp_path):
        t = autocovariance(car1(0.7), [0.0, 0.5, 1.0])
        f = tmp_path / "acf.csv"
        t.to_csv(f)
        back = AcfTable.from_csv(f, model_hash=t.model_hash)
        assert np.array_equal(back.lags, t.lags)
        assert np.array_equal(back.values, t.values)
        assert back.method == t.method

    def test_table_rejects_bad_dominance(self):
        with pytest.raises(CarfimaError):
            AcfTable(lags=np.array([0.0, 1.0]), values=np.array([1.0, 2.0]),
                     method="closed_form", model_hash="x")
