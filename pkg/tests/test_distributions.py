import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import special as sps
from scipy import stats

from embedsolve.distributions import (
    BetaModel,
    InfeasibleMomentsError,
    NormalModel,
    concentration_bound,
    concentration_phi,
    fit_rescaled_beta,
    normal_limit_distance,
    projection_cdf,
    rescaled_beta_moments,
    tail_weight,
)
from embedsolve.sampling import empirical_summary
from embedsolve.special import DivergentIntegralError, betainc, gk_quad, log_beta, norm_cdf

pos = st.floats(0.05, 200.0)


class TestSpecial:
    @settings(max_examples=200, deadline=None)
    @given(pos, pos, st.floats(0.0, 1.0))
    def test_betainc_matches_scipy(self, a, b, x):
        assert betainc(a, b, x) == pytest.approx(sps.betainc(a, b, x), rel=1e-9, abs=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(pos, pos, st.floats(0.0, 1.0))
    def test_betainc_reflection(self, a, b, x):
        assume(1 - (1 - x) == x)
        assert betainc(a, b, x) + betainc(b, a, 1 - x) == pytest.approx(1.0, abs=1e-12)

    def test_betainc_closed_forms(self):
        x = np.linspace(0, 1, 11)
        assert np.allclose(betainc(1, 1, x), x)
        assert np.allclose(betainc(2, 1, x), x**2)
        assert np.allclose(betainc(1, 3, x), 1 - (1 - x) ** 3)

    def test_betainc_clips_and_rejects(self):
        assert betainc(2, 3, -0.5) == 0.0 and betainc(2, 3, 1.5) == 1.0
        with pytest.raises(ValueError):
            betainc(0, 1, 0.5)

    def test_log_beta(self):
        assert log_beta(2.5, 7.0) == pytest.approx(sps.betaln(2.5, 7.0), rel=1e-14)

    def test_norm_cdf(self):
        x = np.linspace(-8, 8, 33)
        assert np.allclose(norm_cdf(x), stats.norm.cdf(x), rtol=1e-13, atol=1e-300)
        assert norm_cdf(0.0) == 0.5

    def test_gk_quad_endpoint_singularity(self):
        assert gk_quad(lambda t: 1 / np.sqrt(t), 0.0, 1.0) == pytest.approx(2.0, rel=1e-9)
        assert gk_quad(np.log, 0.0, 1.0) == pytest.approx(-1.0, rel=1e-9)


class TestModels:
    def test_beta_moments(self):
        m = BetaModel(3.0, 5.0, rescaled=True)
        ref = stats.beta(3.0, 5.0, scale=8 / 3)
        assert m.mean == pytest.approx(1.0)
        assert m.variance == pytest.approx(ref.var())
        assert m.third_moment == pytest.approx(ref.stats(moments="s") * ref.std() ** 3)

    def test_beta_pdf_and_cdf(self):
        m = BetaModel(2.5, 4.0, rescaled=True)
        ref = stats.beta(2.5, 4.0, scale=m.scale)
        t = np.linspace(-0.1, m.scale + 0.1, 41)
        assert np.allclose(m.pdf(t), ref.pdf(t), atol=1e-12)
        assert np.allclose(m.cdf(t), ref.cdf(t), atol=1e-12)

    def test_normal_model(self):
        m = NormalModel(1.0, 0.04)
        t = np.linspace(0, 2, 9)
        assert np.allclose(m.pdf(t), stats.norm(1, 0.2).pdf(t))
        assert np.allclose(m.cdf(t), stats.norm(1, 0.2).cdf(t))
        with pytest.raises(ValueError):
            NormalModel(1.0, 0.0)


class TestProjection:
    def test_matches_beta_law(self):
        d = np.linspace(0, 0.99, 50)
        assert np.allclose(projection_cdf(5, 12, d), stats.beta(2.5, 3.5).cdf(d), atol=1e-12)

    def test_rejects_bad_arguments(self):
        for m, n in [(0, 5), (5, 5), (6, 5)]:
            with pytest.raises(ValueError):
                projection_cdf(m, n, 0.3)
        with pytest.raises(ValueError):
            projection_cdf(2, 5, 1.0)

    def test_concentration_phi(self):
        assert concentration_phi(1.0) == pytest.approx(1.0)
        th = np.linspace(0.01, 3, 100)
        assert np.all(concentration_phi(th)[th != 1] < 1)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 60), st.integers(1, 60), st.floats(0.01, 0.99))
    def test_bound_dominates_tails(self, m, extra, frac):
        n = m + extra
        xi = m / n
        lo = frac * xi
        assert projection_cdf(m, n, lo) <= concentration_bound(m, n, lo, "below") + 1e-15
        hi = xi + frac * (1 - xi)
        if hi < 1:
            assert 1 - projection_cdf(m, n, hi) <= concentration_bound(m, n, hi, "above") + 1e-15

    def test_bound_side_checks(self):
        with pytest.raises(ValueError):
            concentration_bound(3, 6, 0.6, "below")
        with pytest.raises(ValueError):
            concentration_bound(3, 6, 0.4, "above")
        with pytest.raises(ValueError):
            concentration_bound(3, 6, 0.4, "left")


class TestNormalLimit:
    def test_decreasing(self):
        d = [normal_limit_distance(a, a) for a in (2, 8, 32, 128, 512)]
        assert all(x > y for x, y in zip(d, d[1:]))
        assert d[-1] < 0.01

    def test_requires_parameters_above_one(self):
        with pytest.raises(ValueError):
            normal_limit_distance(1.0, 3.0)


class TestBetaFit:
    @settings(max_examples=150, deadline=None)
    @given(st.floats(0.2, 300), st.floats(0.2, 300))
    def test_round_trip(self, a, b):
        V, Z = rescaled_beta_moments(a, b)
        fa, fb = fit_rescaled_beta(V, Z)
        assert fa == pytest.approx(a, rel=1e-6)
        assert fb == pytest.approx(b, rel=1e-6)

    def test_moments_match_scipy(self):
        a, b = 3.0, 7.0
        ref = stats.beta(a, b, scale=(a + b) / a)
        V, Z = rescaled_beta_moments(a, b)
        assert V == pytest.approx(ref.var())
        assert Z == pytest.approx(ref.stats(moments="s") * ref.std() ** 3)

    def test_projection_moments_recover_projection_law(self):
        m, n = 5, 13
        fa, fb = fit_rescaled_beta(*rescaled_beta_moments(m / 2, (n - m) / 2))
        assert (fa, fb) == pytest.approx((2.5, 4.0))

    def test_infeasible(self):
        with pytest.raises(InfeasibleMomentsError):
            fit_rescaled_beta(0.1, 0.5)  # Z/(2V) = 2.5 >= V
        with pytest.raises(InfeasibleMomentsError):
            fit_rescaled_beta(0.1, -0.2)  # below -(1-V)/2
        with pytest.raises(InfeasibleMomentsError):
            fit_rescaled_beta(0.0, 0.0)

    def test_boundary_is_infeasible(self):
        V = 0.2
        with pytest.raises(InfeasibleMomentsError):
            fit_rescaled_beta(V, 2 * V * V)


class TestTailWeight:
    def test_beta_closed_form(self):
        # int_0^delta t^(a-2)(1-t)^(b-1)/B(a,b) dt = B(a-1,b)/B(a,b) I_delta(a-1,b)
        a, b, d = 3.5, 6.0, 0.4
        ref = math.exp(log_beta(a - 1, b) - log_beta(a, b)) * sps.betainc(a - 1, b, d)
        assert tail_weight(BetaModel(a, b), d) == pytest.approx(ref, rel=1e-8)

    def test_beta_near_divergence(self):
        a, b, d = 1.2, 3.0, 0.5
        ref = math.exp(log_beta(a - 1, b) - log_beta(a, b)) * sps.betainc(a - 1, b, d)
        assert tail_weight(BetaModel(a, b), d) == pytest.approx(ref, rel=1e-7)

    def test_rescaled_beta(self):
        a, b, d = 4.0, 5.0, 0.7
        m = BetaModel(a, b, rescaled=True)
        ref = gk_quad(lambda t: m.pdf(t) / t, 0.0, d)
        assert tail_weight(m, d) == pytest.approx(ref, rel=1e-8)

    def test_divergent_cases(self):
        with pytest.raises(DivergentIntegralError):
            tail_weight(BetaModel(1.0, 2.0), 0.5)
        with pytest.raises(DivergentIntegralError):
            tail_weight(NormalModel(1.0, 0.1), 0.5)
        with pytest.raises(ValueError):
            tail_weight(BetaModel(3.0, 2.0), 0.0)

    def test_empirical(self):
        vals = stats.beta(4, 6).rvs(400_000, random_state=np.random.default_rng(3))
        dist = empirical_summary(vals, 400)
        ref = tail_weight(BetaModel(4.0, 6.0), 0.3)
        assert tail_weight(dist, 0.3) == pytest.approx(ref, rel=0.02)
