import math

import numpy as np
import pytest
import scipy.special

from hyplab import radial
from hyplab.errors import BlowUp, BracketFailure, NoRealRoot, StiffIntegration


class TestMuBall:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 3.0])
    def test_h3_closed_form(self, r):
        res = radial.mu_ball(3, r, l=0, k=1)
        exact = 1.0 + math.pi**2 / r**2
        assert abs(res.mu - exact) <= 1e-8 * exact
        assert res.residual <= 1e-10

    def test_h3_ball_radius_pi(self):
        res = radial.mu_ball(3, math.pi, l=0, k=1)
        assert res.mu == pytest.approx(2.0, abs=1e-8)

    def test_flat_limit_bessel(self):
        # small balls behave like Euclidean disks; oracle is scipy's
        # independent Bessel-zero root-finder
        j01 = scipy.special.jn_zeros(0, 1)[0]
        res = radial.mu_ball(2, 0.05, l=0, k=1)
        flat = j01**2 / 0.05**2
        assert abs(res.mu - flat) / flat < 5e-3

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_step_halving_consistency(self, n, r):
        mu_a = radial.mu_ball(n, r, n_steps=2048).mu
        mu_b = radial.mu_ball(n, r, n_steps=4096).mu
        assert abs(mu_a - mu_b) <= 1e-9 * mu_a

    def test_eigenvalue_decreases_with_radius(self):
        for n in (2, 3):
            mus = [radial.mu_ball(n, r).mu for r in (0.25, 0.5, 1.0, 2.0, 4.0)]
            assert all(a > b for a, b in zip(mus, mus[1:]))

    def test_ground_state_positive_inside(self):
        res = radial.mu_ball(2, 1.0)
        assert np.all(res.v_samples[:-1] > 0.0)
        # decreasing near the boundary
        assert res.v_samples[-1] < res.v_samples[-10] < res.v_samples[-100]

    def test_second_radial_mode_changes_sign_once(self):
        res = radial.mu_ball(2, 1.0, l=0, k=2)
        signs = np.sign(res.v_samples[np.abs(res.v_samples) > 1e-6])
        flips = np.count_nonzero(np.diff(signs))
        assert flips == 1

    def test_interlacing_of_angular_modes(self):
        mu_l1 = radial.mu_ball(2, 1.0, l=1, k=1).mu
        mu_l2 = radial.mu_ball(2, 1.0, l=2, k=1).mu
        assert mu_l2 > mu_l1

    def test_bracket_failure_with_low_cap(self):
        with pytest.raises(BracketFailure):
            radial.mu_ball(2, 1.0, mu_cap=1.0)

    def test_stiff_guard_on_wild_eigenvalue(self):
        with pytest.raises(StiffIntegration):
            radial._shoot(2, 0, 1e12, 1.0, 2048)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            radial.mu_ball(1, 1.0)
        with pytest.raises(ValueError):
            radial.mu_ball(2, -1.0)
        with pytest.raises(ValueError):
            radial.mu_ball(2, 1.0, k=0)


class TestClosedFormH3:
    def test_mu1(self):
        assert radial.mu1_h3_closed_form(math.pi) == pytest.approx(2.0, abs=1e-15)
        assert radial.mu1_h3_closed_form(1.0) == pytest.approx(1.0 + math.pi**2, abs=1e-12)

    def test_profile_value(self):
        val = radial.v_h3(math.pi, math.pi / 2.0)
        assert val == pytest.approx(1.0 / math.sinh(math.pi / 2.0), abs=1e-14)

    def test_small_t_limit(self):
        r = 1.7
        assert radial.v_h3(r, 1e-8) == pytest.approx(math.pi / r, rel=1e-8)

    def test_domain_check(self):
        with pytest.raises(ValueError):
            radial.v_h3(1.0, 1.5)


class TestPhiProfile:
    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_initial_slope(self, n, r):
        prof = radial.phi_profile(n, r)
        assert abs(prof.phi_p[0] + prof.mu1 / n) <= 1e-6 * prof.mu1

    def test_h3_closed_form_agreement(self):
        # oracle: phi = (pi/r) cot(pi t / r) - coth(t) from the closed form
        r = 1.0
        prof = radial.phi_profile(3, r)
        t = prof.t_samples
        keep = t <= r - 0.05
        q = math.pi / r
        phi_exact = q / np.tan(q * t[keep]) - np.cosh(t[keep]) / np.sinh(t[keep])
        assert np.abs(prof.phi[keep] - phi_exact).max() <= 1e-8

    def test_phi_negative_inside(self):
        prof = radial.phi_profile(2, 1.0)
        assert np.all(prof.phi[1:] < 0.0)

    @pytest.mark.parametrize("n,r", [(2, 0.5), (3, 1.0), (4, 2.0), (2, 4.0)])
    def test_tangential_margin_always_negative(self, n, r):
        assert radial.phi_profile(n, r).margin_tangential < 0.0

    def test_blow_up_with_wrong_eigenvalue(self):
        # an eigenvalue above mu1 makes v vanish before r, so phi dives early
        with pytest.raises(BlowUp):
            radial.phi_profile(3, 1.0, mu1=20.0)


class TestBallConcavity:
    def test_h3_r1_strictly_super_log_concave(self):
        rep = radial.ball_concavity(3, 1.0)
        assert rep.strictly_super_log_concave
        assert rep.margin_radial < 0.0 and rep.margin_tangential < 0.0

    def test_h3_r5_not_super_log_concave(self):
        rep = radial.ball_concavity(3, 5.0)
        assert not rep.strictly_super_log_concave
        assert rep.margin_radial > 0.0

    def test_h3_small_ball(self):
        assert radial.ball_concavity(3, 0.1).strictly_super_log_concave

    @pytest.mark.parametrize("r,negative", [(1, True), (2, True)] + [(rr, False) for rr in range(3, 10)])
    def test_sign_pattern_closed_form(self, r, negative):
        m = radial.h3_radial_margin(float(r))
        assert (m < 0.0) == negative

    @pytest.mark.parametrize("r,negative", [(1, True), (2, True)] + [(rr, False) for rr in range(3, 10)])
    def test_sign_pattern_shooting(self, r, negative):
        m = radial.phi_profile(3, float(r)).margin_radial
        assert (m < 0.0) == negative


class TestCriticalRadius:
    def test_h3_threshold_inside_2_3(self):
        c0 = radial.critical_radius_h3()
        assert 2.0 < c0 < 3.0
        assert radial.h3_radial_margin(c0 - 0.1) < 0.0
        assert radial.h3_radial_margin(c0 + 0.1) > 0.0

    def test_shooting_agrees_with_closed_form(self):
        c0 = radial.critical_radius_h3()
        r0 = radial.critical_radius(3)
        assert abs(r0 - c0) <= 1e-3

    def test_exists_in_two_dimensions(self):
        r0 = radial.critical_radius(2)
        assert r0 > 0.0
        rep = radial.ball_concavity(2, r0 / 2.0)
        assert rep.margin_radial < 0.0 and rep.margin_tangential < 0.0


class TestFirstCrossingMargin:
    def test_boundary_case_no_error(self):
        # choose mu1 = A^2/4 exactly: discriminant vanishes, no error
        n, t1 = 3, 0.5
        A = 1.0 + (n - 1) / math.tanh(t1)
        mu1 = A * A / 4.0
        B = (n - 1) / (2.0 * math.sinh(t1) ** 2)
        expected = 2.0 / A - 1.0 / (B + math.sqrt(B * B + mu1))
        assert radial.first_crossing_margin(n, mu1, t1) == pytest.approx(expected, abs=1e-14)

    def test_small_t1_is_positive(self):
        assert radial.first_crossing_margin(3, 10.0, 0.01) > 0.0

    def test_h3_half_ball_crossing_is_impossible(self):
        # at r=0.5 the closed-form eigenvalue is large enough that the
        # crossing configuration admits no real root at t1=0.25
        mu1 = radial.mu1_h3_closed_form(0.5)
        with pytest.raises(NoRealRoot):
            radial.first_crossing_margin(3, mu1, 0.25)

    def test_direct_evaluation(self):
        n, mu1, t1 = 3, 10.0, 0.01
        A = 1.0 + (n - 1) / math.tanh(t1)
        B = (n - 1) / (2.0 * math.sinh(t1) ** 2)
        expected = 2.0 / (A + math.sqrt(A * A - 4 * mu1)) - 1.0 / (B + math.sqrt(B * B + mu1))
        assert radial.first_crossing_margin(n, mu1, t1) == pytest.approx(expected, abs=1e-15)


class TestGapBall:
    def test_h3_unit_ball(self):
        rep = radial.gap_ball(3, 1.0)
        assert rep.mu1 == pytest.approx(1.0 + math.pi**2, rel=1e-8)
        assert rep.gap > 0.0
        assert rep.diameter == 2.0
        assert rep.reference_scale == pytest.approx(math.pi**2 / 4.0, abs=1e-12)

    def test_mu2_matches_brute_force_scan(self):
        # oracle: coarse sweep of the shooting endpoint over both angular
        # indices, counting sign changes
        rep = radial.gap_ball(2, 1.0)
        found = []
        for l in (0, 1):
            prev, _ = radial._shoot(2, l, 1e-9, 1.0, 512)
            mu = 0.0
            while len([f for f in found if f[0] == l]) < 2 and mu < 40.0:
                mu += 0.05
                cur, _ = radial._shoot(2, l, mu, 1.0, 512)
                if prev * cur < 0:
                    found.append((l, mu))
                prev = cur
        second_radial = [m for l, m in found if l == 0][1]
        first_angular = [m for l, m in found if l == 1][0]
        oracle_mu2 = min(second_radial, first_angular)
        assert abs(rep.mu2 - oracle_mu2) <= 0.05

    def test_h2_unit_ball_gap_vs_reference(self):
        rep = radial.gap_ball(2, 1.0)
        assert rep.gap > 0.0
        assert rep.reference_scale == pytest.approx(math.pi**2 / 4.0, abs=1e-12)
        # the gap-to-reference ratio is recorded, not asserted against any bound
        assert rep.gap / rep.reference_scale > 0.0

    def test_consistency_with_mu_ball(self):
        assert radial.gap_ball(2, 0.5).mu1 == radial.mu_ball(2, 0.5, 0, 1).mu
