"""Base solution fields and the closed-form vs quadrature norm dual route."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odkirch.base_solutions import (
    BallGeometry,
    ExteriorGeometry,
    ball_profile,
    check_gradient_exponent,
    check_u_exponent,
    exterior_profile,
    grad_u_ball,
    grad_u_exterior,
    norm_grad_u_ball,
    norm_grad_u_exterior,
    norm_quadrature,
    norm_u_ball,
    norm_u_exterior,
    u_ball,
    u_exterior,
)
from odkirch.errors import DomainError

INF = math.inf

# Exterior sup norms frozen from a 40-digit evaluation of
# (1/(n-2)) (n/(n-2))^(-n/2), attained at r = sqrt(n/(n-2)).
EXTERIOR_SUP_U = {
    3: 0.19245008972987525,
    4: 0.125,
    5: 0.092951600308978005,
}


class TestGeometries:
    def test_ball_defaults(self):
        g = BallGeometry(n=3, radius=2.0)
        assert g.center == (0.0, 0.0, 0.0)
        assert np.array_equal(g.x0, np.zeros(3))

    def test_ball_center_kept(self):
        g = BallGeometry(n=2, radius=1.0, center=(1.0, -2.0))
        assert g.center == (1.0, -2.0)

    def test_ball_validation(self):
        with pytest.raises(DomainError):
            BallGeometry(n=0, radius=1.0)
        with pytest.raises(DomainError):
            BallGeometry(n=2, radius=0.0)
        with pytest.raises(DomainError):
            BallGeometry(n=2, radius=-1.0)
        with pytest.raises(DomainError):
            BallGeometry(n=2, radius=1.0, center=(0.0,))
        with pytest.raises(DomainError):
            BallGeometry(n=2.5, radius=1.0)

    def test_exterior_validation(self):
        with pytest.raises(DomainError):
            ExteriorGeometry(n=1)
        assert ExteriorGeometry(n=2).n == 2


class TestProfilesAndFields:
    def test_ball_boundary_conditions(self):
        geom = BallGeometry(n=3, radius=1.5)
        prof = ball_profile(geom)
        assert prof.phi(1.5) == pytest.approx(0.0, abs=1e-15)
        assert prof.dphi(1.5) == pytest.approx(1.5)  # |grad U| = R on the sphere
        assert prof.phi(0.0) == pytest.approx(-1.125)

    def test_exterior_boundary_conditions(self):
        for n in (2, 3, 4, 7):
            prof = exterior_profile(ExteriorGeometry(n=n))
            assert prof.phi(1.0) == pytest.approx(0.0, abs=1e-15)
            assert abs(prof.dphi(1.0)) == pytest.approx(1.0)

    def test_exterior_far_field(self):
        # n = 2 stays bounded (limit -1/2); n >= 3 decays to zero.
        flat = exterior_profile(ExteriorGeometry(n=2))
        assert flat.phi(1e8) == pytest.approx(-0.5, rel=1e-12)
        decaying = exterior_profile(ExteriorGeometry(n=3))
        assert abs(decaying.phi(1e8)) < 1e-8

    def test_point_evaluators_match_profiles(self):
        geom = BallGeometry(n=2, radius=2.0, center=(0.5, 0.5))
        prof = ball_profile(geom)
        x = np.array([1.0, -0.3])
        r = float(np.linalg.norm(x - geom.x0))
        assert u_ball(x, geom) == pytest.approx(float(prof.phi(r)))
        grad = grad_u_ball(x, geom)
        assert np.allclose(grad, (x - geom.x0))

        egeom = ExteriorGeometry(n=4)
        eprof = exterior_profile(egeom)
        y = np.array([1.2, 0.0, -0.9, 0.4])
        rr = float(np.linalg.norm(y))
        assert u_exterior(y, egeom) == pytest.approx(float(eprof.phi(rr)))
        gg = grad_u_exterior(y, egeom)
        assert np.allclose(gg, float(eprof.dphi(rr)) / rr * y)

    def test_gradient_field_matches_finite_differences(self):
        prof = exterior_profile(ExteriorGeometry(n=3))
        u = prof.as_field()
        grad = prof.gradient_field()
        x = np.array([1.1, -0.7, 0.6])
        h = 1e-6
        fd = np.array([
            (u(x + h * e) - u(x - h * e)) / (2 * h) for e in np.eye(3)
        ])
        assert np.allclose(grad(x), fd, atol=1e-8)

    def test_domain_rejection(self):
        geom = BallGeometry(n=2, radius=1.0)
        with pytest.raises(DomainError):
            u_ball(np.array([1.2, 0.0]), geom)
        with pytest.raises(DomainError):
            grad_u_ball(np.array([0.0, -1.4]), geom)
        egeom = ExteriorGeometry(n=3)
        with pytest.raises(DomainError):
            u_exterior(np.array([0.4, 0.0, 0.0]), egeom)
        with pytest.raises(DomainError):
            u_ball(np.array([0.1, 0.0, 0.0]), geom)  # wrong dimension

    def test_scale(self):
        prof = ball_profile(BallGeometry(n=2, radius=1.0)).scale(3.0)
        assert prof.phi(0.5) == pytest.approx(3.0 * 0.5 * (0.25 - 1.0))
        assert prof.dphi(0.5) == pytest.approx(1.5)


class TestAdmissibility:
    def test_ball_accepts_any_positive_exponent(self):
        geom = BallGeometry(n=3, radius=1.0)
        for p in (0.5, 1.0, 97.0, INF):
            check_u_exponent(p, geom)
            check_gradient_exponent(p, geom)

    @pytest.mark.parametrize("bad", [0.0, -2.0])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(DomainError):
            check_u_exponent(bad, BallGeometry(n=2, radius=1.0))

    def test_planar_exterior_u_only_sup(self):
        geom = ExteriorGeometry(n=2)
        check_u_exponent(INF, geom)
        with pytest.raises(DomainError):
            check_u_exponent(5.0, geom)

    def test_planar_exterior_gradient_threshold(self):
        # The planar gradient decays like r^-3, so L^q needs q > 2/3.
        geom = ExteriorGeometry(n=2)
        check_gradient_exponent(0.7, geom)
        check_gradient_exponent(1.0, geom)
        with pytest.raises(DomainError):
            check_gradient_exponent(2.0 / 3.0, geom)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_exterior_thresholds(self, n):
        geom = ExteriorGeometry(n=n)
        p_thr = n / (n - 2.0)
        q_thr = n / (n - 1.0)
        check_u_exponent(p_thr + 0.01, geom)
        check_gradient_exponent(q_thr + 0.01, geom)
        with pytest.raises(DomainError):
            check_u_exponent(p_thr, geom)
        with pytest.raises(DomainError):
            check_gradient_exponent(q_thr, geom)


class TestBallNormsDualRoute:
    @pytest.mark.parametrize("n,radius", [(2, 1.0), (3, 1.5), (5, 0.7)])
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.7, INF])
    def test_u_norm(self, n, radius, p):
        geom = BallGeometry(n=n, radius=radius)
        prof = ball_profile(geom)
        closed = norm_u_ball(p, geom)
        quad = norm_quadrature(prof.phi, p, n, 0.0, radius)
        assert quad == pytest.approx(closed, rel=1e-9)

    @pytest.mark.parametrize("n,radius", [(2, 1.0), (3, 1.5), (5, 0.7)])
    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 4.0, INF])
    def test_gradient_norm(self, n, radius, q):
        geom = BallGeometry(n=n, radius=radius)
        prof = ball_profile(geom)
        closed = norm_grad_u_ball(q, geom)
        quad = norm_quadrature(prof.dphi, q, n, 0.0, radius)
        assert quad == pytest.approx(closed, rel=1e-9)

    def test_sup_norms_explicit(self):
        geom = BallGeometry(n=4, radius=2.0)
        assert norm_u_ball(INF, geom) == pytest.approx(2.0)
        assert norm_grad_u_ball(INF, geom) == pytest.approx(2.0)

    @given(r1=st.floats(0.2, 3.0), r2=st.floats(0.2, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_radius(self, r1, r2):
        lo, hi = sorted((r1, r2))
        if hi - lo < 1e-9:
            return
        n_lo = norm_u_ball(2.0, BallGeometry(n=3, radius=lo))
        n_hi = norm_u_ball(2.0, BallGeometry(n=3, radius=hi))
        assert n_lo < n_hi


class TestExteriorNormsDualRoute:
    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("p_kind", ["near_threshold", "moderate", "large", "sup"])
    def test_u_norm(self, n, p_kind):
        geom = ExteriorGeometry(n=n)
        p = {
            "near_threshold": n / (n - 2.0) + 0.5,
            "moderate": 4.0,
            "large": 7.3,
            "sup": INF,
        }[p_kind]
        prof = exterior_profile(geom)
        closed = norm_u_exterior(p, geom)
        quad = norm_quadrature(prof.phi, p, n, 1.0, INF)
        assert quad == pytest.approx(closed, rel=1e-8)

    def test_u_norm_planar_sup(self):
        geom = ExteriorGeometry(n=2)
        prof = exterior_profile(geom)
        assert norm_u_exterior(INF, geom) == 0.5
        assert norm_quadrature(prof.phi, INF, 2, 1.0, INF) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("q_kind", ["near_threshold", "one", "two", "five", "sup"])
    def test_gradient_norm(self, n, q_kind):
        geom = ExteriorGeometry(n=n)
        threshold = 2.0 / 3.0 if n == 2 else n / (n - 1.0)
        q = {
            "near_threshold": threshold + 0.1,
            "one": 1.0,
            "two": 2.0,
            "five": 5.0,
            "sup": INF,
        }[q_kind]
        if q != INF and q <= threshold:
            pytest.skip("inadmissible exponent for this dimension")
        prof = exterior_profile(geom)
        closed = norm_grad_u_exterior(q, geom)
        quad = norm_quadrature(prof.dphi, q, n, 1.0, INF)
        assert quad == pytest.approx(closed, rel=1e-8)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_frozen_sup_values(self, n):
        geom = ExteriorGeometry(n=n)
        assert norm_u_exterior(INF, geom) == pytest.approx(EXTERIOR_SUP_U[n], rel=1e-14)
        assert norm_grad_u_exterior(INF, geom) == 1.0

    def test_planar_gradient_closed_form(self):
        # n = 2: ||grad U||_q^q = 2 pi / (3q - 2); check q = 1 against 2 pi.
        geom = ExteriorGeometry(n=2)
        assert norm_grad_u_exterior(1.0, geom) == pytest.approx(2.0 * math.pi, rel=1e-13)

    def test_inadmissible_raise(self):
        geom = ExteriorGeometry(n=3)
        with pytest.raises(DomainError):
            norm_u_exterior(2.0, geom)
        with pytest.raises(DomainError):
            norm_grad_u_exterior(1.2, geom)


class TestNormQuadrature:
    def test_simple_field(self):
        # f(r) = 1 on the unit ball in R^3: ||f||_p^p = |B| = 4 pi / 3.
        val = norm_quadrature(lambda r: np.ones_like(np.asarray(r, float)), 2.0, 3, 0.0, 1.0)
        assert val == pytest.approx((4.0 * math.pi / 3.0) ** 0.5, rel=1e-10)

    def test_zero_field(self):
        val = norm_quadrature(lambda r: np.zeros_like(np.asarray(r, float)), 2.0, 3, 0.0, 1.0)
        assert val == 0.0

    def test_bad_exponent(self):
        with pytest.raises(DomainError):
            norm_quadrature(lambda r: r, -1.0, 2, 0.0, 1.0)
