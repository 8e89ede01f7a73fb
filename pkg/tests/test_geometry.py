import numpy as np
import pytest

from geowalk.collocation import CollocationConfig, collocation_first_order
from geowalk.geometry import (FrameError, UnboundedDirectionError, V0,
                              auxiliary_V, christoffel_action,
                              frame_curvature_matrix, frame_orthonormality_error,
                              geodesic_rhs, gram_schmidt, hilbert_distance,
                              orthonormal_frame, parallel_transport_rhs, ricci,
                              riemann_inner)
from geowalk.polytope import Polytope, make_point, simplex
from geowalk.diagnostics import (christoffel_index_sum,
                                 hilbert_distance_bisection, riemann_index_sum,
                                 ricci_basis_sum)

from conftest import random_interior_point, random_polytope


class TestChristoffel:
    def test_hypercube_center_cancels(self, box3):
        p = make_point(box3, np.zeros(3))
        e1 = np.array([1.0, 0.0, 0.0])
        np.testing.assert_allclose(christoffel_action(p, e1, e1), 0.0, atol=1e-14)

    def test_interval_center_odd(self, interval):
        p = make_point(interval, np.zeros(1))
        np.testing.assert_allclose(christoffel_action(p, np.ones(1), np.ones(1)),
                                   0.0, atol=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_index_sum_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        P = random_polytope(rng, n, int(rng.integers(n + 2, 14)))
        x = random_interior_point(rng, P)
        p = make_point(P, x)
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        fast = christoffel_action(p, u, v)
        slow = christoffel_index_sum(P, x, u, v)
        np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-12)

    def test_symmetry_exact(self, rng):
        P = random_polytope(rng, 4, 10)
        p = make_point(P, random_interior_point(rng, P))
        u = rng.standard_normal(4)
        v = rng.standard_normal(4)
        np.testing.assert_array_equal(christoffel_action(p, u, v),
                                      christoffel_action(p, v, u))

    def test_bilinearity(self, rng):
        P = random_polytope(rng, 3, 9)
        p = make_point(P, random_interior_point(rng, P))
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        lhs = christoffel_action(p, 2.5 * u, v)
        rhs = 2.5 * christoffel_action(p, u, v)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestGeodesicRhs:
    def test_flat_center(self, box3):
        p = make_point(box3, np.zeros(3))
        np.testing.assert_allclose(geodesic_rhs(p, np.array([0.3, 0, 0])), 0.0,
                                   atol=1e-15)

    def test_interval_closed_form(self, interval):
        x, v = 0.3, 1.0
        p = make_point(interval, np.array([x]))
        px = (1 + x) ** -2 + (1 - x) ** -2
        expected = v * v * ((1 + x) ** -3 - (1 - x) ** -3) / px
        assert geodesic_rhs(p, np.array([v]))[0] == pytest.approx(expected, rel=1e-12)

    def test_equals_negative_christoffel(self, rng):
        P = random_polytope(rng, 4, 11)
        p = make_point(P, random_interior_point(rng, P))
        v = rng.standard_normal(4)
        np.testing.assert_allclose(geodesic_rhs(p, v),
                                   -christoffel_action(p, v, v), rtol=1e-12)


class TestParallelTransport:
    def test_zero_velocity(self, rng, box3):
        p = make_point(box3, np.array([0.2, 0.1, -0.3]))
        v = rng.standard_normal(3)
        np.testing.assert_allclose(
            parallel_transport_rhs(p, np.zeros(3), v), 0.0, atol=1e-15)

    def test_box_axes_decouple(self, box3):
        p = make_point(box3, np.array([0.4, 0.0, 0.0]))
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        np.testing.assert_allclose(parallel_transport_rhs(p, e1, e2), 0.0,
                                   atol=1e-15)

    def test_norm_preserved_along_solved_transport(self, rng):
        # integrate dv/dt along a fixed straight curve's transport equation and
        # check the metric norm is conserved
        P = simplex(3)
        x0 = np.full(3, 0.2)
        direction = np.array([0.05, -0.03, 0.02])

        def F(v, t):
            p = make_point(P, x0 + t * direction)
            return parallel_transport_rhs(p, direction, v)

        v0 = rng.standard_normal(3)
        cfg = CollocationConfig(degree=12, ell=1.0, tol=1e-11)
        curve = collocation_first_order(F, v0, cfg)
        n0 = make_point(P, x0).metric_norm(v0)
        n1 = make_point(P, x0 + direction).metric_norm(curve.end_value())
        assert abs(n1 - n0) <= 1e-8 * n0


class TestRiemann:
    def test_antisymmetry_uv(self, rng):
        P = random_polytope(rng, 4, 9)
        p = make_point(P, random_interior_point(rng, P))
        u = rng.standard_normal(4)
        w = rng.standard_normal(4)
        z = rng.standard_normal(4)
        assert riemann_inner(p, u, u, w, z) == pytest.approx(0.0, abs=1e-12)

    def test_flat_box(self, rng, box3):
        p = make_point(box3, np.array([0.3, -0.2, 0.5]))
        vs = [rng.standard_normal(3) for _ in range(4)]
        assert abs(riemann_inner(p, *vs)) < 1e-10

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_index_sum_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        P = simplex(3)
        x = np.full(3, 0.2) + 0.05 * rng.standard_normal(3)
        p = make_point(P, x)
        u, v, w, z = (rng.standard_normal(3) for _ in range(4))
        fast = riemann_inner(p, u, v, w, z)
        slow = riemann_index_sum(P, x, u, v, w, z)
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-11)

    def test_curvature_symmetries(self, rng):
        P = random_polytope(rng, 3, 8)
        p = make_point(P, random_interior_point(rng, P))
        for _ in range(100):
            u, v, w, z = (rng.standard_normal(3) for _ in range(4))
            r = riemann_inner(p, u, v, w, z)
            scale = abs(r) + 1e-3
            assert abs(riemann_inner(p, w, z, u, v) - r) <= 1e-10 * scale
            assert abs(riemann_inner(p, v, u, w, z) + r) <= 1e-10 * scale
            assert abs(riemann_inner(p, u, v, z, w) + r) <= 1e-10 * scale


class TestRicci:
    def test_flat_box(self, rng, box3):
        p = make_point(box3, np.array([0.1, 0.6, -0.4]))
        u = rng.standard_normal(3)
        assert abs(ricci(p, u)) < 1e-10

    def test_zero_vector(self, rng):
        P = random_polytope(rng, 3, 7)
        p = make_point(P, random_interior_point(rng, P))
        assert ricci(p, np.zeros(3)) == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_basis_sum_oracle(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(2, 5))
        P = random_polytope(rng, n, int(rng.integers(n + 2, 12)))
        p = make_point(P, random_interior_point(rng, P))
        u = rng.standard_normal(n)
        fast = ricci(p, u)
        slow = ricci_basis_sum(p, u)
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-11)


class TestFrameCurvature:
    def test_flat_box_zero(self, box3):
        p = make_point(box3, np.array([0.2, -0.5, 0.1]))
        op = frame_curvature_matrix(p, np.array([0.3, 0.1, -0.2]),
                                    orthonormal_frame(p))
        np.testing.assert_allclose(op.Rt, 0.0, atol=1e-10)

    def test_interval_1d_zero(self, interval):
        p = make_point(interval, np.array([0.4]))
        op = frame_curvature_matrix(p, np.array([1.0]), orthonormal_frame(p))
        assert op.Rt.shape == (1, 1)
        assert abs(op.Rt[0, 0]) < 1e-12

    def test_entries_match_riemann_inner(self, rng):
        P = simplex(3)
        p = make_point(P, np.full(3, 0.22))
        X = orthonormal_frame(p)
        c = rng.standard_normal(3)
        op = frame_curvature_matrix(p, c, X)
        for i in range(3):
            for j in range(3):
                direct = riemann_inner(p, X[:, i], c, c, X[:, j])
                assert op.Rt[i, j] == pytest.approx(direct, rel=1e-9, abs=1e-12)

    def test_trace_is_ricci(self, rng):
        P = random_polytope(rng, 4, 10)
        p = make_point(P, random_interior_point(rng, P))
        c = rng.standard_normal(4)
        op = frame_curvature_matrix(p, c, orthonormal_frame(p))
        r = ricci(p, c)
        assert op.ric == pytest.approx(r, rel=1e-8, abs=1e-12)

    def test_non_orthonormal_frame_rejected(self, rng, box3):
        p = make_point(box3, np.zeros(3))
        with pytest.raises(FrameError):
            frame_curvature_matrix(p, np.ones(3), np.eye(3))  # not g-orthonormal

    def test_gram_schmidt_repairs(self, rng, box3):
        p = make_point(box3, np.array([0.1, 0.2, 0.3]))
        X = orthonormal_frame(p) + 1e-3 * rng.standard_normal((3, 3))
        fixed = gram_schmidt(p, X)
        assert frame_orthonormality_error(p, fixed) < 1e-12


class TestAuxiliaryV:
    def test_zero_velocity(self):
        assert auxiliary_V(np.zeros((5, 4)), 1e-3, 4) == 0.0

    def test_single_coordinate_formula(self):
        # n = 1, one sample with unit slack velocity in one coordinate:
        # l4 term is 1, inf term is 1/sqrt(h)
        h = 1e-2
        sv = np.array([[1.0, 0.0]])
        expected = 1.0 + 1.0 / np.sqrt(h)
        assert auxiliary_V(sv, h, 1) == pytest.approx(expected, rel=1e-12)

    def test_v0_bound_monte_carlo(self, rng):
        # on the cube the walk's geodesics should satisfy V <= V0/2 with
        # probability at least 1 - 3/n
        from geowalk.polytope import hypercube, make_point
        from geowalk.walk import WalkConfig, propose

        n = 4
        P = hypercube(n)
        p = make_point(P, np.zeros(n))
        cfg = WalkConfig(h=1e-3)
        good = 0
        total = 300
        for _ in range(total):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            assert np.isfinite(step.v_gamma)
            good += step.v_gamma <= V0 / 2.0
        # binomial slack: expected fraction >= 1 - 3/n = 0.25; observed is ~1
        assert good / total >= 0.25


class TestHilbertDistance:
    def test_interval_log3(self, interval):
        d = hilbert_distance(interval, np.zeros(1), np.array([0.5]))
        assert d == pytest.approx(np.log(3.0), rel=1e-12)

    def test_identical_points(self, box3):
        assert hilbert_distance(box3, np.zeros(3), np.zeros(3)) == 0.0

    def test_symmetry(self, rng, box3):
        x = random_interior_point(rng, box3, scale=0.4)
        y = random_interior_point(rng, box3, scale=0.4)
        assert hilbert_distance(box3, x, y) == pytest.approx(
            hilbert_distance(box3, y, x), rel=1e-10)

    def test_matches_bisection_oracle(self, rng, box3):
        for _ in range(5):
            x = random_interior_point(rng, box3, scale=0.5)
            y = random_interior_point(rng, box3, scale=0.5)
            if np.allclose(x, y):
                continue
            fast = hilbert_distance(box3, x, y)
            slow = hilbert_distance_bisection(box3, x, y)
            assert fast == pytest.approx(slow, rel=1e-8, abs=1e-10)

    def test_triangle_inequality(self, rng, box3):
        for _ in range(100):
            x = random_interior_point(rng, box3, scale=0.6)
            y = random_interior_point(rng, box3, scale=0.6)
            z = random_interior_point(rng, box3, scale=0.6)
            dxy = hilbert_distance(box3, x, y)
            dxz = hilbert_distance(box3, x, z)
            dzy = hilbert_distance(box3, z, y)
            assert dxy <= dxz + dzy + 1e-9

    def test_unbounded_direction(self):
        P = Polytope(np.eye(2), np.zeros(2))  # open positive quadrant
        with pytest.raises(UnboundedDirectionError):
            hilbert_distance(P, np.array([1.0, 1.0]), np.array([2.0, 2.0]))

    def test_manifold_distance_bound(self, rng):
        # geodesic length never exceeds sqrt(m) * d_H by more than 1%
        from geowalk.walk import WalkConfig, propose

        P = simplex(3)
        p = make_point(P, np.full(3, 0.2))
        cfg = WalkConfig(h=5e-3)
        for _ in range(10):
            step = propose(p, cfg, rng)
            assert step.fail_reason is None
            speed = p.metric_norm(step.v_x / step.ell)
            length = step.ell * speed
            dh = hilbert_distance(P, p.x, step.end.x)
            assert length <= np.sqrt(P.m) * dh * 1.01
