import math

import numpy as np
import pytest

from intgarch import (
    DegenerateSeries,
    FitConfig,
    InsufficientData,
    IntGarchParams,
    Interval,
    InvalidState,
    RangeSeries,
    TABLE1_MODELS,
    UnsupportedOrder,
    cls_gradient,
    cls_hessian,
    cls_loss,
    delta_metric,
    derive_seed,
    fit,
    h_filter,
    initialize,
    predict_interval,
    replication_study,
    simulate,
    SimConfig,
    summarize_replications,
    volatility_path,
)
from intgarch.moments import SQRT_2_OVER_PI


def sim_series(params, length, seed, burn_in=200):
    return simulate(SimConfig(params=params, length=length, seed=seed, burn_in=burn_in)).series


def random_fixture(rng, length=120):
    """Random (series, evaluation params) pair for derivative checks."""
    truth = IntGarchParams(
        k=float(rng.uniform(0.5, 4.0)),
        mu=float(rng.uniform(0.2, 1.0)),
        alpha=float(rng.uniform(0.05, 0.3)),
        beta=float(rng.uniform(0.01, 0.1)),
        gamma=float(rng.uniform(0.05, 0.3)),
    )
    s = sim_series(truth, length, int(rng.integers(0, 2**32)))
    at = IntGarchParams(
        k=float(rng.uniform(0.5, 4.0)),
        mu=float(rng.uniform(0.2, 1.0)),
        alpha=float(rng.uniform(0.05, 0.3)),
        beta=float(rng.uniform(0.01, 0.1)),
        gamma=float(rng.uniform(0.05, 0.3)),
    )
    return s, at


def perfect_fit_series(params, h0, n=40):
    """Series with zero centers and radii exactly k * h_t (zero CLS loss)."""
    k, mu = params.k, params.mu
    a, b, g = params.alpha[0], params.beta[0], params.gamma[0]
    lam_prev, del_prev, h_prev = 0.0, 0.0, h0
    radii = []
    for _ in range(n):
        h = (mu + a * abs(lam_prev) + b * del_prev) + g * h_prev
        d = k * h
        radii.append(d)
        lam_prev, del_prev, h_prev = 0.0, d, h
    return RangeSeries(range(n), [0.0] * n, radii)


class TestPredictInterval:
    def test_unit(self):
        out = predict_interval(IntGarchParams(k=1.0, mu=1.0, alpha=0.1, beta=0.1), 1.0)
        assert (out.lower, out.upper) == (-1.0, 1.0)

    def test_forced_arithmetic(self, model_i):
        out = predict_interval(model_i, 2.0)
        assert out.radius == pytest.approx(9.4324)
        assert out.center == 0.0

    def test_center_always_zero(self, model_i):
        rng = np.random.default_rng(300)
        for h in rng.uniform(0.01, 10.0, 25):
            assert predict_interval(model_i, float(h)).center == 0.0

    def test_nonpositive_scale(self, model_i):
        with pytest.raises(InvalidState):
            predict_interval(model_i, 0.0)


class TestHFilter:
    def test_constant_when_no_feedback(self):
        p = IntGarchParams(k=1.0, mu=0.8, alpha=0.0, beta=0.0, gamma=0.0)
        s = RangeSeries(range(5), [0.1, -0.2, 0.3, 0.0, 0.5], [0.1, 0.2, 0.3, 0.4, 0.5])
        assert np.all(h_filter(p, s) == 0.8)

    def test_one_step_arithmetic(self):
        # h2 = 1 + 1*|−1| + 1*0.5 + 0.5*h1 with h1 = 1 + 0.5*2 = 2
        p = IntGarchParams(k=1.0, mu=1.0, alpha=1.0, beta=1.0, gamma=0.5)
        s = RangeSeries(range(2), [-1.0, 0.0], [0.5, 0.0])
        h = h_filter(p, s, h0_mode=2.0, r0=Interval(0.0, 0.0))
        assert h[0] == pytest.approx(2.0)
        assert h[1] == pytest.approx(3.5)

    def test_round_trip_reproduces_simulator(self, model_i):
        out = simulate(SimConfig(params=model_i, length=400, seed=31, burn_in=0,
                                 h0_mode=1.25, r0_mode=Interval(0.4, 2.0)))
        h = h_filter(model_i, out.series, h0_mode=1.25, r0=Interval(0.4, 2.0))
        assert np.array_equal(h, out.h_path)

    def test_round_trip_general_orders(self):
        p = IntGarchParams(k=1.5, mu=0.3, alpha=(0.1, 0.05), beta=(0.08, 0.02),
                           gamma=(0.1, 0.05, 0.02))
        out = simulate(SimConfig(params=p, length=300, seed=32, burn_in=0,
                                 h0_mode=0.9, r0_mode=Interval(-0.1, 0.7)))
        h = h_filter(p, out.series, h0_mode=0.9, r0=Interval(-0.1, 0.7))
        assert np.array_equal(h, out.h_path)

    def test_h_at_least_mu(self, model_ii):
        s = sim_series(model_ii, 500, 33)
        assert np.all(h_filter(model_ii, s) >= model_ii.mu)

    def test_empty_series(self, model_i):
        with pytest.raises(InsufficientData):
            h_filter(model_i, RangeSeries([], [], []))


class TestClsLoss:
    def test_perfect_fit_zero(self, model_i):
        s = perfect_fit_series(model_i, h0=2.0)
        cfg = FitConfig(h0_mode=2.0)
        assert cls_loss(model_i, s, cfg, r0=Interval(0.0, 0.0)) == 0.0

    def test_single_observation_residual_identity(self):
        p = IntGarchParams(k=1.7, mu=0.6, alpha=0.2, beta=0.1, gamma=0.3)
        s = RangeSeries([0], [1.0], [1.7 * 0.6])  # h1 = mu with zero starts
        cfg = FitConfig(h0_mode=0.0)
        assert cls_loss(p, s, cfg, r0=Interval(0.0, 0.0)) == pytest.approx(1.0)

    def test_equals_summed_delta_metric(self, model_ii):
        rng = np.random.default_rng(301)
        for seed in rng.integers(0, 10**6, 5):
            s = sim_series(model_ii, 80, int(seed))
            cfg = FitConfig()
            h = h_filter(model_ii, s)
            total = sum(
                delta_metric(iv, predict_interval(model_ii, float(hv))) ** 2
                for iv, hv in zip(s, h)
            )
            got = cls_loss(model_ii, s, cfg)
            assert got == pytest.approx(total, rel=1e-12)

    def test_equals_endpoint_expansion(self, model_ii):
        s = sim_series(model_ii, 150, 34)
        h = h_filter(model_ii, s)
        k = model_ii.k
        lam, rad = s.centers, s.radii
        expanded = 0.5 * np.sum((lam - rad + k * h) ** 2 + (lam + rad - k * h) ** 2)
        assert cls_loss(model_ii, s) == pytest.approx(float(expanded), rel=1e-12)

    def test_center_sign_invariance(self, model_ii):
        s = sim_series(model_ii, 200, 35)
        flipped = RangeSeries(s.timestamps, -s.centers, s.radii)
        assert cls_loss(model_ii, flipped) == pytest.approx(cls_loss(model_ii, s), rel=1e-14)


def frozen_objective(theta, k, series, h_lag, abs_lam_lag, delta_lag):
    # lagged scale treated as exogenous data
    mu, a, b, g = theta
    pred = mu + a * abs_lam_lag + b * delta_lag + g * h_lag
    resid = series.radii - k * pred
    return float(series.centers @ series.centers + resid @ resid)


def lag_arrays(series, r0, h_base, h0):
    abs_lam_lag = np.concatenate(([abs(r0.center)], np.abs(series.centers[:-1])))
    delta_lag = np.concatenate(([r0.radius], series.radii[:-1]))
    h_lag = np.concatenate(([h0], h_base[:-1]))
    return abs_lam_lag, delta_lag, h_lag


def central_diff(f, theta, j, step):
    up = theta.copy()
    dn = theta.copy()
    up[j] += step
    dn[j] -= step
    return (f(up) - f(dn)) / (2.0 * step)


def resolve_h0_r0(series):
    from intgarch.intervals import sample_mean

    h0 = math.sqrt(math.pi / 2.0) * float(np.abs(series.centers).mean())
    return h0, sample_mean(series)


class TestGradientHessian:
    def test_zero_gradient_at_perfect_fit(self, model_i):
        s = perfect_fit_series(model_i, h0=2.0)
        cfg = FitConfig(h0_mode=2.0)
        g = cls_gradient(model_i, s, cfg, r0=Interval(0.0, 0.0))
        assert np.allclose(g, 0.0, atol=1e-10)

    def test_frozen_gradient_matches_frozen_fd(self):
        rng = np.random.default_rng(302)
        for _ in range(20):
            s, at = random_fixture(rng)
            h0, r0 = resolve_h0_r0(s)
            h_base = h_filter(at, s, "stationary_mean", r0)
            abs_lam_lag, delta_lag, h_lag = lag_arrays(s, r0, h_base, h0)
            theta = np.array([at.mu, at.alpha[0], at.beta[0], at.gamma[0]])
            f = lambda t: frozen_objective(t, at.k, s, h_lag, abs_lam_lag, delta_lag)
            fd = np.array([central_diff(f, theta, j, 1e-5 * max(1.0, abs(theta[j]))) for j in range(4)])
            an = cls_gradient(at, s)
            assert np.linalg.norm(fd - an, np.inf) <= 1e-6 * max(1.0, np.linalg.norm(an, np.inf))

    def test_exact_gradient_matches_loss_fd(self):
        rng = np.random.default_rng(303)
        cfg = FitConfig(gradient_mode="exact_recursive")
        for _ in range(20):
            s, at = random_fixture(rng)
            theta = np.array([at.mu, at.alpha[0], at.beta[0], at.gamma[0]])

            def loss_at(t):
                p = IntGarchParams(k=at.k, mu=t[0], alpha=t[1], beta=t[2], gamma=t[3])
                return cls_loss(p, s, cfg)

            fd = np.array(
                [central_diff(loss_at, theta, j, 1e-6 * max(1.0, abs(theta[j]))) for j in range(4)]
            )
            an = cls_gradient(at, s, cfg)
            assert np.linalg.norm(fd - an, np.inf) <= 1e-6 * max(1.0, np.linalg.norm(an, np.inf))

    def test_hessian_single_observation_structure(self):
        p = IntGarchParams(k=2.0, mu=0.5, alpha=0.2, beta=0.1, gamma=0.3)
        s = RangeSeries([0], [0.0], [1.0])
        h0 = 1.5
        cfg = FitConfig(h0_mode=h0)
        H = cls_hessian(p, s, cfg, r0=Interval(0.0, 0.0))
        kk2 = 2.0 * p.k * p.k
        expect = np.zeros((4, 4))
        expect[0, 0] = kk2
        expect[0, 3] = expect[3, 0] = kk2 * h0
        expect[3, 3] = kk2 * h0 * h0
        assert np.allclose(H, expect, rtol=1e-14)

    def test_hessian_symmetric_psd(self):
        rng = np.random.default_rng(304)
        for _ in range(10):
            s, at = random_fixture(rng)
            H = cls_hessian(at, s)
            assert np.allclose(H, H.T, rtol=1e-12)
            assert np.linalg.eigvalsh(H).min() >= -1e-9 * np.abs(H).max()

    def test_hessian_matches_frozen_gradient_fd(self):
        rng = np.random.default_rng(305)
        for _ in range(10):
            s, at = random_fixture(rng)
            h0, r0 = resolve_h0_r0(s)
            h_base = h_filter(at, s, "stationary_mean", r0)
            abs_lam_lag, delta_lag, h_lag = lag_arrays(s, r0, h_base, h0)
            V = np.column_stack((np.ones(len(s)), abs_lam_lag, delta_lag, h_lag))
            theta = np.array([at.mu, at.alpha[0], at.beta[0], at.gamma[0]])

            def frozen_grad(t):
                resid = at.k * (V @ t) - s.radii
                return 2.0 * at.k * (V.T @ resid)

            fd = np.column_stack(
                [central_diff(frozen_grad, theta, j, 1e-5) for j in range(4)]
            )
            an = cls_hessian(at, s)
            assert np.linalg.norm(fd - an, np.inf) <= 1e-6 * max(1.0, np.linalg.norm(an, np.inf))

    def test_higher_orders_rejected(self):
        p = IntGarchParams(k=1.0, mu=1.0, alpha=(0.1, 0.1), beta=0.1, gamma=0.1)
        s = RangeSeries(range(3), [0.1, 0.2, -0.1], [0.1, 0.2, 0.3])
        with pytest.raises(UnsupportedOrder):
            cls_gradient(p, s)
        with pytest.raises(UnsupportedOrder):
            cls_hessian(p, s)


class TestInitialize:
    def test_equal_means_give_sqrt_2_over_pi(self):
        s = RangeSeries(range(4), [0.02, -0.02, 0.02, -0.02], [0.02, 0.02, 0.02, 0.02])
        p0 = initialize(s)
        assert p0.k == pytest.approx(SQRT_2_OVER_PI)

    def test_constants(self):
        rng = np.random.default_rng(306)
        s = RangeSeries(range(50), rng.standard_normal(50), np.abs(rng.standard_normal(50)))
        p0 = initialize(s)
        assert p0.alpha[0] == pytest.approx(0.2 * math.sqrt(math.pi / 2.0))
        assert p0.gamma[0] == 0.2

    def test_worked_example(self):
        # mean |center| = 0.01, mean radius = 0.02
        s = RangeSeries(range(2), [0.01, -0.01], [0.02, 0.02])
        p0 = initialize(s)
        assert p0.k == pytest.approx(1.5958, abs=1e-4)
        assert p0.mu == pytest.approx(0.005013, abs=1e-6)
        assert p0.beta[0] == pytest.approx(0.12533, abs=1e-5)

    def test_degenerate(self):
        with pytest.raises(DegenerateSeries):
            initialize(RangeSeries(range(3), [0.0, 0.0, 0.0], [0.1, 0.2, 0.3]))
        with pytest.raises(DegenerateSeries):
            initialize(RangeSeries(range(3), [0.1, 0.2, 0.3], [0.0, 0.0, 0.0]))


class TestFit:
    def test_recovers_model_ii(self, model_ii):
        s = sim_series(model_ii, 3000, 41, burn_in=0)
        fr = fit(s)
        assert fr.converged
        e = fr.params
        assert e.k == pytest.approx(2.7330, abs=0.20)
        assert e.mu == pytest.approx(0.1385, abs=0.06)
        assert e.alpha[0] == pytest.approx(0.2572, abs=0.09)
        assert e.beta[0] == pytest.approx(0.0202, abs=0.03)
        assert e.gamma[0] == pytest.approx(0.1459, abs=0.26)
        assert fr.k_fixed

    def test_loss_trace_monotone_and_improving(self, model_ii):
        for seed in (50, 51, 52):
            fr = fit(sim_series(model_ii, 1500, seed, burn_in=0))
            assert all(a >= b for a, b in zip(fr.loss_trace, fr.loss_trace[1:]))
            assert fr.loss <= fr.loss_trace[0]
            assert fr.loss == fr.loss_trace[-1]

    def test_converged_gradient_bound(self, model_ii):
        for seed in (53, 54, 55, 56, 57):
            fr = fit(sim_series(model_ii, 1500, seed, burn_in=0))
            assert fr.converged
            assert fr.final_gradient_norm <= 1e-4 * (1.0 + abs(fr.loss))

    def test_estimates_nonnegative(self, model_ii):
        rng = np.random.default_rng(307)
        for seed in rng.integers(0, 10**6, 5):
            fr = fit(sim_series(model_ii, 800, int(seed)))
            e = fr.params
            assert min(e.k, e.mu, e.alpha[0], e.beta[0], e.gamma[0]) >= 0.0

    def test_gamma_zero_data_clips_to_exact_zero(self):
        # majority of replications should land exactly on the boundary, and a
        # fit ending there must still satisfy the projected-gradient bound
        truth = IntGarchParams(k=2.0, mu=0.3, alpha=0.25, beta=0.05, gamma=0.0)
        zeros = 0
        reps = 20
        for i in range(reps):
            out = simulate(SimConfig(params=truth, length=2000, seed=derive_seed(900, i),
                                     burn_in=0, h0_mode="zero", r0_mode="stationary_mean"))
            fr = fit(out.series)
            zeros += fr.params.gamma[0] == 0.0
            assert fr.final_gradient_norm <= 1e-4 * (1.0 + abs(fr.loss))
        assert zeros > reps / 2

    def test_small_scale_data(self):
        # equity-like magnitudes: centers and radii around 1e-2, which makes
        # the raw Hessian diagonal span several orders of magnitude
        rng = np.random.default_rng(909)
        truth = IntGarchParams(k=1.7, mu=0.004, alpha=0.06, beta=0.35, gamma=0.05)
        out = simulate(SimConfig(params=truth, length=2500, seed=910, burn_in=200))
        assert out.series.radii.mean() < 0.1
        for cfg in (FitConfig(), FitConfig(gradient_mode="exact_recursive")):
            fr = fit(out.series, cfg)
            assert fr.converged
            assert fr.final_gradient_norm <= 1e-4 * (1.0 + abs(fr.loss))
            assert all(a >= b for a, b in zip(fr.loss_trace, fr.loss_trace[1:]))
            assert fr.params.k == pytest.approx(1.7, abs=0.3)
        # the alternating k update is a slow fixed-point iteration on data
        # like this; non-convergence must be flagged, never silent, and the
        # trace stays monotone regardless
        fr = fit(out.series, FitConfig(k_handling="alternating"))
        assert all(a >= b for a, b in zip(fr.loss_trace, fr.loss_trace[1:]))
        assert fr.params.k == pytest.approx(1.7, abs=0.3)
        if not fr.converged:
            assert fr.iterations == 500

    def test_constant_series_degenerate(self):
        s = RangeSeries(range(40), [0.5] * 40, [0.25] * 40)
        with pytest.raises(DegenerateSeries):
            fit(s)

    def test_short_series_rejected(self, model_ii):
        s = sim_series(model_ii, 10, 58)
        with pytest.raises(InsufficientData):
            fit(s)

    def test_iteration_budget_exhaustion_is_flagged(self, model_ii):
        s = sim_series(model_ii, 500, 64, burn_in=0)
        fr = fit(s, FitConfig(max_iterations=1))
        assert not fr.converged
        assert fr.iterations == 1
        assert fr.loss <= fr.loss_trace[0]

    def test_k_fixed_at_initial(self, model_ii):
        s = sim_series(model_ii, 1000, 59, burn_in=0)
        fr = fit(s)
        assert fr.params.k == initialize(s).k

    def test_alternating_k_updates(self, model_ii):
        s = sim_series(model_ii, 2000, 60, burn_in=0)
        fr = fit(s, FitConfig(k_handling="alternating"))
        assert not fr.k_fixed
        assert fr.params.k != initialize(s).k
        assert all(a >= b for a, b in zip(fr.loss_trace, fr.loss_trace[1:]))
        assert fr.params.k == pytest.approx(model_ii.k, abs=0.3)

    def test_exact_recursive_mode(self, model_ii):
        s = sim_series(model_ii, 1500, 61, burn_in=0)
        frozen = fit(s)
        exact = fit(s, FitConfig(gradient_mode="exact_recursive"))
        assert exact.converged
        assert exact.params.mu == pytest.approx(frozen.params.mu, rel=0.2)
        assert exact.loss <= frozen.loss_trace[0]

    def test_consistency_bias_shrinks_with_t(self, model_ii):
        truth = np.array([model_ii.k, model_ii.mu, model_ii.alpha[0],
                          model_ii.beta[0], model_ii.gamma[0]])
        bias = {}
        for T in (1000, 3000, 10000):
            est = replication_study(model_ii, 50, T, 500)
            bias[T] = np.abs(est - truth).mean(axis=0)
        for j in range(5):
            assert bias[1000][j] >= bias[3000][j] >= bias[10000][j]


class TestVolatilityPath:
    def test_factor_two(self, model_ii):
        s = sim_series(model_ii, 300, 62)
        fr = fit(s)
        expect = fr.h_path * math.sqrt(1.0 + fr.params.k)
        assert np.array_equal(volatility_path(fr), expect)
        assert np.array_equal(fr.volatility_path, expect)

    def test_k3_doubles_h(self):
        truth = IntGarchParams(k=3.0, mu=0.4, alpha=0.2, beta=0.05, gamma=0.1)
        s = sim_series(truth, 500, 63)
        fr = fit(s)
        ratio = volatility_path(fr) / fr.h_path
        assert np.allclose(ratio, math.sqrt(1.0 + fr.params.k))


class TestReplicationStudy:
    def test_reproducible(self, model_ii):
        a = replication_study(model_ii, 3, 400, 808)
        b = replication_study(model_ii, 3, 400, 808)
        assert np.array_equal(a, b)

    def test_progress_callback(self, model_ii):
        seen = []
        replication_study(model_ii, 2, 400, 808, progress=lambda i, e: seen.append(i))
        assert seen == [0, 1]

    def test_summary_arithmetic(self, model_i):
        est = np.array([[4.7, 0.5, 0.25, 0.09, 0.18], [4.8, 0.45, 0.28, 0.10, 0.17]])
        rows = summarize_replications(est, model_i)
        k_row = rows[0]
        assert k_row["parameter"] == "k"
        assert k_row["mean_estimate"] == pytest.approx(4.75)
        assert k_row["abs_mean_bias"] == pytest.approx(abs(4.75 - 4.7162))
        assert k_row["mean_abs_bias"] == pytest.approx((abs(4.7 - 4.7162) + abs(4.8 - 4.7162)) / 2)
        assert k_row["empirical_sd"] == pytest.approx(np.std([4.7, 4.8], ddof=1))
