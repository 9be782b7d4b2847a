import math

import numpy as np
import pytest
from scipy.special import expit

from hopfsoliton.curvature import soliton_residual
from hopfsoliton.errors import DomainError, ParameterError
from hopfsoliton.geometry import diagonal_profile, params_from_ab
from hopfsoliton.soliton import (
    check_asymptotics,
    default_gauge,
    extension_r2,
    implicit_x,
    kappa_inverse,
    logistic_profile,
    profile_ode_rhs,
    solve_profile,
)
from hopfsoliton.verify import integrate_profile_ode

PARAM_SETS = [(-2.0, -1.0), (-1.0, -2.0), (-5.0, -0.5), (-0.7, -1.3)]


class TestOdeRhs:
    def test_fixed_points(self, params):
        assert profile_ode_rhs(params, 0.0) == 0.0
        assert profile_ode_rhs(params, 1.0) == 0.0

    def test_logistic_case(self, equal_params):
        assert profile_ode_rhs(equal_params, 0.5) == pytest.approx(0.25, abs=1e-16)

    def test_unequal_case(self, params):
        assert profile_ode_rhs(params, 0.5) == pytest.approx(3 / 8, abs=1e-16)


class TestImplicitX:
    def test_centre(self, params):
        F = lambda k: -math.log(1 - k) + 0.5 * math.log(2 - k) + 0.5 * math.log(k)
        assert default_gauge(params) == pytest.approx(F(0.5), abs=1e-15)
        assert default_gauge(params) == pytest.approx(0.5 * math.log(3), abs=1e-15)
        assert implicit_x(params, 0.5, default_gauge(params)) == pytest.approx(0.0, abs=1e-15)

    def test_slope_at_half(self, params):
        h = 1e-5
        slope = (implicit_x(params, 0.5 + h) - implicit_x(params, 0.5 - h)) / (2 * h)
        assert slope == pytest.approx(8 / 3, rel=1e-9)
        assert slope == pytest.approx(1 / profile_ode_rhs(params, 0.5), rel=1e-9)

    @pytest.mark.parametrize("ab", PARAM_SETS)
    def test_monotone_and_unbounded(self, ab):
        p = params_from_ab(*ab)
        k = np.concatenate([np.geomspace(1e-300, 1e-3, 200), np.linspace(2e-3, 1 - 1e-16, 2001)])
        x = implicit_x(p, k)
        assert np.all(np.diff(x) > 0)
        assert x[0] < -10 and x[-1] > 10

    @pytest.mark.parametrize("k", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, params, k):
        with pytest.raises(DomainError):
            implicit_x(params, k)

    def test_equal_moduli_rejected(self, equal_params):
        with pytest.raises(ParameterError):
            implicit_x(equal_params, 0.5)


class TestSolveProfile:
    @pytest.mark.parametrize("ab", PARAM_SETS + [(-1.0, -1.0)])
    def test_centre(self, ab):
        assert solve_profile(params_from_ab(*ab)).k_of_x(0.0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("ab", PARAM_SETS)
    def test_matches_ode_integration(self, ab):
        p = params_from_ab(*ab)
        x = np.linspace(-30, 30, 3001)
        assert np.max(np.abs(solve_profile(p, x).values - integrate_profile_ode(p, x))) < 1e-8

    @pytest.mark.parametrize("ab", PARAM_SETS)
    def test_residual(self, ab):
        p = params_from_ab(*ab)
        assert soliton_residual(solve_profile(p), p.mu, np.linspace(-20, 20, 2001)) < 1e-8

    def test_jet_matches_ode(self, soliton, params):
        x = np.linspace(-25, 25, 501)
        k, dk, ddk = soliton.jet(x)
        np.testing.assert_allclose(dk, profile_ode_rhs(params, k), rtol=0, atol=1e-10)
        inner = np.abs(x) < 3
        np.testing.assert_allclose(dk[inner], profile_ode_rhs(params, k[inner]), rtol=1e-13)
        h = 1e-4
        fd = (soliton.jet(x + h)[1] - soliton.jet(x - h)[1]) / (2 * h)
        np.testing.assert_allclose(ddk, fd, atol=1e-8)

    def test_strictly_increasing(self, soliton):
        k = soliton.k_of_x(np.linspace(-30, 30, 6001))
        assert np.all(np.diff(k) > 0)
        assert np.all((k > 0) & (k < 1))

    def test_gauge_translation(self, params):
        base = solve_profile(params)
        delta = 0.8
        moved = base.with_gauge(base.gauge + delta)
        x = np.linspace(-15, 15, 301)
        np.testing.assert_allclose(moved.k_of_x(x), base.k_of_x(x + delta), atol=1e-10)

    def test_equal_moduli_is_logistic(self, equal_params):
        x = np.linspace(-30, 30, 601)
        sol = solve_profile(equal_params, x)
        np.testing.assert_allclose(sol.values, 1 / (1 + np.exp(-x)), atol=1e-10)
        np.testing.assert_allclose(sol.values, logistic_profile(1.0, x), atol=1e-16)

    def test_tabulation_is_evaluation(self, soliton, params):
        x = np.linspace(-5, 5, 11)
        np.testing.assert_array_equal(solve_profile(params, x).values, soliton.k_of_x(x))


class TestLogistic:
    def test_centre(self):
        assert logistic_profile(1.0, 0.0) == 0.5

    def test_ode(self):
        x = np.linspace(-20, 20, 401)
        h = 1e-5
        k = logistic_profile(2.5, x)
        dk = (logistic_profile(2.5, x + h) - logistic_profile(2.5, x - h)) / (2 * h)
        np.testing.assert_allclose(dk, k * (1 - k), atol=1e-10)
        exact = 2.5 * np.exp(-x) / (1 + 2.5 * np.exp(-x)) ** 2
        np.testing.assert_allclose(k * (1 - k), exact, atol=1e-12)

    def test_limits(self):
        assert logistic_profile(1.0, 50.0) == pytest.approx(1.0)
        assert logistic_profile(1.0, -50.0) == pytest.approx(0.0, abs=1e-20)

    def test_bad_constant(self):
        with pytest.raises(ParameterError):
            logistic_profile(0.0, 1.0)


class TestKappaInverse:
    def test_centre(self, soliton):
        assert kappa_inverse(soliton, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_round_trip(self, soliton, params):
        x = np.linspace(-15, 15, 3001)
        k, dk, _ = soliton.jet(x)
        back = kappa_inverse(soliton, k)
        # the k channel carries one rounding of k, amplified by 1/kappa'
        allowed = np.maximum(1e-10, 4 * np.spacing(k) / dk)
        assert np.all(np.abs(back - x) <= allowed)
        assert np.max(np.abs(soliton.x_of_theta(soliton.theta(x)) - x)) < 1e-12

    def test_equals_implicit_x(self, soliton, params):
        k = np.linspace(0.01, 0.99, 50)
        np.testing.assert_allclose(kappa_inverse(soliton, k), implicit_x(params, k, soliton.gauge), atol=1e-14)

    def test_monotone(self, soliton):
        assert np.all(np.diff(kappa_inverse(soliton, np.linspace(0.001, 0.999, 999))) > 0)

    def test_domain(self, soliton):
        with pytest.raises(DomainError):
            kappa_inverse(soliton, 1.0)


class TestAsymptotics:
    def test_soliton_passes(self, soliton, params):
        rep = check_asymptotics(soliton.metric_profile(), params, 30.0)
        assert rep.ok
        assert abs(rep.values["1b"]) < 1e-6
        assert abs(rep.values["2b"]) < 1e-6

    def test_k_channel_only(self, soliton, params):
        # without the logit channel the values lose precision but still pass at moderate L
        prof = diagonal_profile(soliton.jet)
        rep = check_asymptotics(prof, params, 15.0)
        assert abs(rep.values["2b"]) < 1e-6
        assert abs(rep.values["1b"]) < 1e-4

    def test_logistic_fails_2b(self, params):
        def logistic(x):
            e = expit(x)
            return e, e * (1 - e), e * (1 - e) * (1 - 2 * e)

        rep = check_asymptotics(diagonal_profile(logistic), params, 30.0)
        assert not rep.passed["2b"]
        assert rep.values["2b"] == pytest.approx(1.0 - params.c_k, abs=1e-6)
        assert rep.passed["1c"] and rep.passed["1d"] and rep.passed["2c"] and rep.passed["2d"]

    def test_bad_L(self, soliton, params):
        with pytest.raises(ParameterError):
            check_asymptotics(soliton.metric_profile(), params, 0.0)


class TestExtension:
    def test_vanishes_at_curve(self, params):
        vals = [extension_r2(params, 1.3, 1 - 10.0**-j) for j in range(2, 12)]
        assert all(v > 0 for v in vals)
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 1e-10

    def test_consistency_with_chart(self, params):
        for r1 in (0.4, 1.0, 2.2):
            for k in (0.1, 0.5, 0.93):
                r2sq = extension_r2(params, r1, k)
                x = params.ratio * math.log(r1**2) - math.log(r2sq)
                assert x == pytest.approx(implicit_x(params, k), abs=1e-12)

    def test_value(self, params):
        expected = 0.5 * 1.5**-0.5 * 0.5**-0.5
        assert extension_r2(params, 1.0, 0.5) == pytest.approx(expected, rel=1e-15)

    def test_errors(self, params, equal_params):
        with pytest.raises(DomainError):
            extension_r2(params, 0.0, 0.5)
        with pytest.raises(DomainError):
            extension_r2(params, 1.0, 1.0)
        with pytest.raises(ParameterError):
            extension_r2(equal_params, 1.0, 0.5)
