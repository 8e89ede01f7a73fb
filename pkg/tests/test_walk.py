import math

import numpy as np
import pytest

from geowalk.diagnostics import (OneDimBarrier, integrated_autocorrelation,
                                 oned_geodesic, oned_transition_log_density)
from geowalk.geometry import frame_orthonormality_error, ricci
from geowalk.polytope import hypercube, make_point, simplex
from geowalk.walk import (WalkConfig, dikin_walk_step, logdet_dexp,
                          logdet_dexp_pair, metropolis_step, propose,
                          propose_with_tangent, run_chain, run_dikin_chain,
                          sample_gaussian_direction, transition_log_density,
                          _transport_frame)

from conftest import random_interior_point, random_polytope


class _ZeroDraw:
    """rng stub whose Gaussian draws are all zero."""

    def standard_normal(self, n):
        return np.zeros(n)

    def uniform(self):
        return 0.5


class TestGaussianDirection:
    def test_covariance_at_cube_center(self):
        # g = 2I so cov(w) should be I/2
        P = hypercube(2)
        p = make_point(P, np.zeros(2))
        rng = np.random.default_rng(11)
        draws = np.stack([sample_gaussian_direction(p, rng)
                          for _ in range(100_000)])
        cov = draws.T @ draws / len(draws)
        se = 3.0 * 0.5 / math.sqrt(len(draws))
        np.testing.assert_allclose(cov, 0.5 * np.eye(2), atol=4 * se)

    def test_expected_metric_norm_is_n(self, rng):
        P = random_polytope(rng, 4, 10)
        p = make_point(P, random_interior_point(rng, P))
        vals = []
        for _ in range(100_000):
            w = sample_gaussian_direction(p, rng)
            vals.append(p.metric_norm(w) ** 2)
        vals = np.array(vals)
        se = vals.std() / math.sqrt(len(vals))
        assert abs(vals.mean() - 4.0) <= 3.0 * se

    def test_seeded_determinism(self, box3):
        p = make_point(box3, np.zeros(3))
        a = sample_gaussian_direction(p, np.random.default_rng(99))
        b = sample_gaussian_direction(p, np.random.default_rng(99))
        np.testing.assert_array_equal(a, b)


class TestPropose:
    def test_zero_draw_at_center_stays(self, box3):
        p = make_point(box3, np.zeros(3))  # drift = 0 at the center
        step = propose(p, WalkConfig(h=1e-2), _ZeroDraw())
        assert step.fail_reason is None
        np.testing.assert_allclose(step.end.x, p.x, atol=1e-12)

    def test_box_coordinates_match_oned_oracle(self, rng, box3):
        p = make_point(box3, np.array([0.2, -0.3, 0.1]))
        cfg = WalkConfig(h=0.04)
        bar = OneDimBarrier(-1.0, 1.0)
        for _ in range(5):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            for i in range(3):
                oracle = oned_geodesic(bar, p.x[i], float(step.v_x[i]), 1.0)
                assert abs(step.end.x[i] - oracle) < 1e-7

    def test_constant_speed(self, rng):
        P = simplex(3)
        p = make_point(P, np.full(3, 0.2))
        cfg = WalkConfig(h=5e-3)
        for _ in range(10):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            assert step.speed_drift <= 1e-6

    def test_norm_preservation(self, rng):
        P = random_polytope(rng, 3, 9)
        p = make_point(P, random_interior_point(rng, P))
        cfg = WalkConfig(h=2e-3)
        for _ in range(20):
            step = propose(p, cfg, rng)
            if step.fail_reason is not None:
                continue
            nx = step.start.metric_norm(step.v_x)
            ny = step.end.metric_norm(step.v_y)
            assert abs(nx - ny) <= 1e-6 * nx

    def test_reverse_consistency(self, rng):
        P = simplex(3)
        p = make_point(P, np.full(3, 0.22))
        cfg = WalkConfig(h=4e-3)
        for _ in range(5):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            back = propose_with_tangent(step.end, cfg, step.v_y)
            assert back.fail_reason is None
            assert np.linalg.norm(back.end.x - p.x) <= 1e-7 * (
                1 + np.linalg.norm(p.x))
            assert np.linalg.norm(back.v_y - (-step.v_x)) <= 1e-6

    def test_huge_step_fails_gracefully(self, box3):
        p = make_point(box3, np.zeros(3))
        cfg = WalkConfig(h=50.0, max_halvings=2)
        rng = np.random.default_rng(0)
        reasons = set()
        for _ in range(10):
            step = propose(p, cfg, rng)
            if step.fail_reason:
                reasons.add(step.fail_reason)
        assert reasons <= {"exit", "non_contraction"}


class TestLogdetDexp:
    def test_flat_box_zero(self, rng, box3):
        p = make_point(box3, np.array([0.3, 0.2, -0.1]))
        step = propose(p, WalkConfig(h=0.05), rng)
        assert step.fail_reason is None
        assert abs(logdet_dexp(step, "forward")) < 1e-8
        assert abs(logdet_dexp(step, "backward")) < 1e-8

    def test_interval_zero(self, rng, interval):
        p = make_point(interval, np.array([0.2]))
        step = propose(p, WalkConfig(h=0.01), rng)
        assert step.fail_reason is None
        assert abs(logdet_dexp(step, "forward")) < 1e-10

    def test_pair_matches_directions(self, rng):
        P = simplex(3)
        p = make_point(P, np.full(3, 0.21))
        step = propose(p, WalkConfig(h=3e-3), rng)
        assert step.fail_reason is None
        lf, lb = logdet_dexp_pair(step)
        assert lf == pytest.approx(logdet_dexp(step, "forward"), abs=1e-12)
        assert lb == pytest.approx(logdet_dexp(step, "backward"), abs=1e-12)

    def test_jacobi_integral_bound(self, rng):
        # |log det Psi - int s(l-s)/l Ric ds| <= (nhR)^2/6 on curved instances
        P = simplex(3)
        p = make_point(P, np.full(3, 0.2))
        h = 2e-3
        cfg = WalkConfig(h=h)
        n = 3
        for _ in range(5):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            ld = logdet_dexp(step, "forward")
            R_max = max(np.abs(np.linalg.norm(Rk, "fro", axis=(1, 2))).max()
                        for Rk in step._R_cache)
            assert n * h * R_max <= 1.0  # bound precondition
            gl, gw = np.polynomial.legendre.leggauss(48)
            ts = 0.5 * step.ell * (gl + 1.0)
            wts = 0.5 * step.ell * gw
            pos, vel = step.path.sample(ts)
            ric = np.array([ricci(make_point(P, x), v)
                            for x, v in zip(pos, vel)])
            integral = float(np.sum(wts * ts * (step.ell - ts) / step.ell * ric))
            assert abs(ld - integral) <= (n * h * R_max) ** 2 / 6.0 + 1e-6

    def test_frame_orthonormal_after_transport(self, rng):
        P = simplex(3)
        p = make_point(P, np.full(3, 0.2))
        step = propose(p, WalkConfig(h=4e-3), rng)
        assert step.fail_reason is None
        step.path.node_geometry()
        _, X_end = _transport_frame(step.path, p.chol_inv.T)
        assert frame_orthonormality_error(step.end, X_end) <= 1e-6


class TestTransitionDensity:
    def test_interval_center_plugin(self, interval):
        # v = 0, mu = 0, g = 2: log p = log sqrt(2) - log sqrt(2 pi h)
        h = 1e-2
        p = make_point(interval, np.zeros(1))
        val = transition_log_density(p, np.zeros(1), p, 0.0, h)
        assert val == pytest.approx(0.5 * np.log(2.0)
                                    - 0.5 * np.log(2 * np.pi * h), rel=1e-12)

    def test_ratio_identity(self, rng):
        # expanded filter ratio in terms of drift inner products
        P = simplex(3)
        p = make_point(P, np.full(3, 0.2))
        cfg = WalkConfig(h=3e-3)
        for _ in range(5):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            lf, lb = logdet_dexp_pair(step)
            log_fwd = transition_log_density(step.start, step.v_x, step.end,
                                             lf, step.h)
            log_rev = transition_log_density(step.end, step.v_y, step.start,
                                             lb, step.h)
            x, y = step.start, step.end
            h = step.h
            expanded = (lb - lf
                        + 0.5 * (y.log_det_metric - x.log_det_metric)
                        + 0.5 * x.metric_inner(step.v_x, x.drift)
                        - h / 8.0 * x.metric_norm(x.drift) ** 2
                        - 0.5 * y.metric_inner(step.v_y, y.drift)
                        + h / 8.0 * y.metric_norm(y.drift) ** 2)
            assert (log_fwd - log_rev) == pytest.approx(-expanded, abs=1e-8)

    def test_matches_oned_oracle(self, rng, interval):
        bar = OneDimBarrier(-1.0, 1.0)
        cfg = WalkConfig(h=3e-3)
        for x0 in (0.0, 0.35, -0.5):
            p = make_point(interval, np.array([x0]))
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            lf, lb = logdet_dexp_pair(step)
            log_fwd = transition_log_density(step.start, step.v_x, step.end,
                                             lf, step.h)
            oracle = oned_transition_log_density(bar, x0, float(step.end.x[0]),
                                                 step.h)
            assert log_fwd == pytest.approx(oracle, abs=1e-6)


class TestMetropolis:
    def test_zero_draw_always_accepts(self, box3):
        p = make_point(box3, np.zeros(3))
        q, step = metropolis_step(p, WalkConfig(h=1e-2), _ZeroDraw())
        assert step.accepted
        assert step.log_ratio == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(q.x, p.x, atol=1e-12)

    def test_high_acceptance_near_center(self):
        P = hypercube(2)
        p = make_point(P, np.zeros(2))
        cfg = WalkConfig(h=1e-3)
        rng = np.random.default_rng(21)
        accepted = 0
        ratios = []
        n_trials = 400
        q = p
        for _ in range(n_trials):
            q2, step = metropolis_step(p, cfg, rng)
            accepted += step.accepted
            if np.isfinite(step.log_ratio):
                ratios.append(abs(step.log_ratio))
        assert accepted / n_trials >= 0.9
        assert np.median(ratios) < 0.05

    def test_ratio_scaling_with_h(self, rng, interval):
        # median |log ratio| should scale like h^{3/2}: factor ~8 per h/4
        p = make_point(interval, np.array([0.3]))

        def median_ratio(h, n_draws=500):
            cfg = WalkConfig(h=h)
            vals = []
            for _ in range(n_draws):
                _, step = metropolis_step(p, cfg, rng)
                if np.isfinite(step.log_ratio):
                    vals.append(abs(step.log_ratio))
            return float(np.median(vals))

        m1 = median_ratio(4e-3)
        m2 = median_ratio(1e-3)
        assert 4.0 <= m1 / m2 <= 16.0

    def test_failure_counts_as_rejection(self, box3):
        p = make_point(box3, np.zeros(3))
        cfg = WalkConfig(h=100.0, max_halvings=1)
        q, step = metropolis_step(p, cfg, np.random.default_rng(3))
        assert not step.accepted
        assert step.fail_reason is not None
        assert q is p


class TestRunChain:
    def test_zero_steps(self, box3):
        samples, stats, _ = run_chain(box3, np.zeros(3), 0,
                                      WalkConfig(h=0.05, burnin=0),
                                      np.random.default_rng(0))
        assert samples.shape == (0, 3)
        assert stats.steps == 0
        assert stats.accept_rate == 0.0

    def test_seeded_determinism(self, box3):
        cfg = WalkConfig(h=0.05, burnin=5)
        a, sa, _ = run_chain(box3, np.zeros(3), 40, cfg,
                             np.random.default_rng(123), seed=123)
        b, sb, _ = run_chain(box3, np.zeros(3), 40, cfg,
                             np.random.default_rng(123), seed=123)
        np.testing.assert_array_equal(a, b)
        assert sa.to_dict()["accept_rate"] == sb.to_dict()["accept_rate"]

    def test_thinning_and_burnin(self, box3):
        cfg = WalkConfig(h=0.05, burnin=3, thin=4)
        samples, stats, _ = run_chain(box3, np.zeros(3), 20, cfg,
                                      np.random.default_rng(5))
        assert samples.shape == (5, 3)
        assert stats.steps == 20

    def test_stats_schema(self, box3):
        cfg = WalkConfig(h=0.05, burnin=0)
        _, stats, _ = run_chain(box3, np.zeros(3), 30, cfg,
                                np.random.default_rng(8), seed=8)
        d = stats.to_dict()
        assert set(d) >= {"accept_rate", "fail_counts", "v_gamma_quantiles",
                          "log_ratio_quantiles", "wall_time_s", "seed", "h"}
        assert set(d["fail_counts"]) == {"exit", "singular", "non_contraction"}

    def test_zero_acceptance_warning(self, box3):
        cfg = WalkConfig(h=200.0, burnin=0, max_halvings=1)
        _, stats, _ = run_chain(box3, np.zeros(3), 10, cfg,
                                np.random.default_rng(4))
        assert stats.zero_acceptance
        assert stats.to_dict()["warning_zero_acceptance"]

    def test_diagnostics_recording(self, box3):
        cfg = WalkConfig(h=0.05, burnin=0, record_diagnostics=True)
        _, _, records = run_chain(box3, np.zeros(3), 12, cfg,
                                  np.random.default_rng(2))
        assert len(records) == 12
        assert all(r.h == cfg.h for r in records)


class TestDikin:
    def test_zero_radius_stays(self, rng, box3):
        p = make_point(box3, np.zeros(3))
        q = dikin_walk_step(p, 0.0, rng)
        assert q is p

    def test_small_radius_high_acceptance(self, box3):
        p = make_point(box3, np.zeros(3))
        rng = np.random.default_rng(17)
        accepted = 0
        cur = p
        n_steps = 2000
        for _ in range(n_steps):
            nxt = dikin_walk_step(cur, 0.3, rng)
            accepted += nxt is not cur
            cur = nxt
        assert accepted / n_steps > 0.5

    def test_box_moments_smoke(self, box3):
        samples, accept = run_dikin_chain(box3, np.zeros(3), 20000, 0.8,
                                          np.random.default_rng(7), burnin=200)
        assert accept > 0.3
        iact = max(integrated_autocorrelation(samples[:, i]) for i in range(3))
        ess = len(samples) / iact
        se_mean = math.sqrt(1.0 / 3.0) / math.sqrt(ess)
        assert np.all(np.abs(samples.mean(axis=0)) <= 4 * se_mean)
