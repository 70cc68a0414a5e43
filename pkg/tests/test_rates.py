import csv
import math
from pathlib import Path

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from embedsolve.distributions import BetaModel, NormalModel
from embedsolve.rates import (
    MAX_DEGREE,
    OrthogonalFamily,
    basic_schedule,
    chebyshev_rate,
    chebyshev_schedule,
    hermite_He,
    jacobi_p0_squared_closed,
    mk_beta,
    mk_normal,
    optimal_polynomial,
    optimal_schedule,
    prefactor_quadrature,
    prefactor_standard_error,
)
from embedsolve.sampling import empirical_summary

TABLE = Path(__file__).parent / "data" / "table1.csv"
SIGMAS = {"sigma_1_16": 1 / 16, "sigma_1_32": 1 / 32, "sigma_1_64": 1 / 64}


def table_rows():
    with TABLE.open() as fh:
        return list(csv.DictReader(fh))


def mk_normal_mp(sigma, K, dps=60):
    """M_k from mpmath's physicists' Hermite: He_j(x) = 2^{-j/2} H_j(x/sqrt 2)."""
    with mpmath.workdps(dps):
        x = -1 / mpmath.mpf(sigma)
        total, out = mpmath.mpf(0), []
        for j in range(K + 1):
            he = mpmath.hermite(j, x / mpmath.sqrt(2)) / mpmath.power(2, mpmath.mpf(j) / 2)
            total += he**2 / mpmath.factorial(j)
            out.append(float(1 / total))
    return np.array(out)


def sig6(x):
    return float(f"{x:.5e}")


class TestHermite:
    def test_He_matches_numpy(self):
        x = np.linspace(-3, 3, 13)
        for k in range(8):
            c = np.zeros(k + 1)
            c[k] = 1
            assert np.allclose(hermite_He(k, x), np.polynomial.hermite_e.hermeval(x, c))

    def test_table_golden(self):
        for row in table_rows():
            k = int(row["k"])
            for col, sigma in SIGMAS.items():
                assert sig6(mk_normal(sigma, 12)[k]) == float(row[col]), (k, col)

    def test_table_against_independent_oracle(self):
        for row in table_rows():
            k = int(row["k"])
            for col, sigma in SIGMAS.items():
                assert sig6(mk_normal_mp(sigma, 12)[k]) == float(row[col]), (k, col)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.005, 3.0), st.integers(0, MAX_DEGREE))
    def test_mk_normal_matches_oracle(self, sigma, K):
        assert np.allclose(mk_normal(sigma, K), mk_normal_mp(sigma, K), rtol=1e-11, atol=0)

    def test_no_overflow_at_max_degree(self):
        M = mk_normal(1 / 128, MAX_DEGREE)
        assert np.all(np.isfinite(M)) and np.all(M > 0)
        assert np.all(np.diff(np.log(M)) < 0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            mk_normal(0.0, 3)
        with pytest.raises(ValueError):
            mk_normal(0.1, MAX_DEGREE + 1)


class TestJacobi:
    def test_legendre(self):
        K = 20
        assert np.allclose(mk_beta(1.0, 1.0, K), 1 / (np.arange(K + 1) + 1.0) ** 2, rtol=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.3, 50), st.floats(0.3, 50), st.integers(0, 40))
    def test_recursion_matches_closed_form(self, a, b, K):
        closed = np.array([jacobi_p0_squared_closed(a, b, k) for k in range(K + 1)])
        assert np.allclose(mk_beta(a, b, K), 1 / np.cumsum(closed), rtol=1e-10)

    def test_rescaling_invariance(self):
        for rescaled in (False, True):
            fam = OrthogonalFamily.jacobi(3.0, 5.0, rescaled=rescaled)
            sched = optimal_schedule(fam, 6)
            for k in range(7):
                q = prefactor_quadrature(sched, fam.weight(), k)
                assert q == pytest.approx(mk_beta(3.0, 5.0, 6)[k], rel=1e-10)


@pytest.mark.parametrize(
    "family",
    [OrthogonalFamily.hermite(0.3), OrthogonalFamily.jacobi(2.5, 4.0), OrthogonalFamily.jacobi(0.7, 1.5, rescaled=False)],
    ids=["hermite", "jacobi-rescaled", "jacobi-unit"],
)
class TestFamilies:
    def test_orthonormal(self, family):
        w = family.weight()
        K = 8
        if isinstance(w, NormalModel):
            lo, hi = w.E - 12 * w.sigma, w.E + 12 * w.sigma
        else:
            lo, hi = w.support
        G = np.empty((K + 1, K + 1))
        for i in range(K + 1):
            for j in range(i + 1):
                G[i, j] = G[j, i] = integrate.quad(
                    lambda t: family.values(K, t)[i] * family.values(K, t)[j] * w.pdf(t), lo, hi, limit=200
                )[0]
        assert np.allclose(G, np.eye(K + 1), atol=1e-7)

    def test_optimal_polynomial_normalized_and_attains_mk(self, family):
        M = family.reduction_factors(10)
        sched = optimal_schedule(family, 10)
        for k in range(11):
            assert float(optimal_polynomial(family, k)(0.0)) == pytest.approx(1.0, rel=1e-10)
            assert prefactor_quadrature(sched, family.weight(), k) == pytest.approx(M[k], rel=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 8), st.lists(st.floats(-3, 3), min_size=8, max_size=8))
    def test_minimality(self, family, k, coef):
        c = np.array([1.0] + coef[:k])
        P = lambda t: np.polyval(c[::-1], t)  # noqa: E731
        val = prefactor_quadrature(P, family.weight(), k, nodes=k + 12)
        assert val >= family.reduction_factors(k)[k] * (1 - 1e-10)

    def test_all_degrees_consistent(self, family):
        sched = optimal_schedule(family, 5)
        t = np.linspace(0.1, 1.5, 7)
        allv = sched.all_degrees(t)
        for k in range(6):
            assert np.allclose(allv[k], sched(k, t))


class TestChebyshev:
    def test_normalized_and_equioscillating(self):
        s = chebyshev_schedule(0.5, 3.0, 10)
        lam = np.linspace(s.a, s.b, 20001)
        for k in range(11):
            assert float(s(k, 0.0)) == pytest.approx(1.0)
            assert np.max(np.abs(s(k, lam))) == pytest.approx(s.bound(k, classical=True), rel=1e-6)

    def test_rate(self):
        assert chebyshev_rate(9.0) == pytest.approx(0.5)
        s = chebyshev_schedule(0.5, 3.0, 2)
        assert s.kappa == pytest.approx(6.0) and s.r == pytest.approx(chebyshev_rate(6.0))

    def test_tight_form_is_not_a_bound_at_degree_zero(self):
        s = chebyshev_schedule(0.5, 3.0, 3)
        assert s.bound(0) < 1.0 == s.bound(0, classical=True)
        assert s.bound(0) == pytest.approx(2 / 3)

    def test_tight_form_below_classical(self):
        s = chebyshev_schedule(0.5, 3.0, 10)
        for k in range(11):
            assert s.bound(k) <= s.bound(k, classical=True)

    def test_rejects(self):
        with pytest.raises(ValueError):
            chebyshev_schedule(1.0, 3.0, 4)
        with pytest.raises(ValueError):
            chebyshev_schedule(0.5, 0.4, 4)
        with pytest.raises(ValueError):
            basic_schedule(0.5, 3).bound(1)
        with pytest.raises(ValueError):
            basic_schedule(0.5, 3)(4, 0.1)


class TestPrefactor:
    def test_basic_schedule_normal_closed_form(self):
        # E[(1 - t)^2] = V for t ~ N(1, V)
        s = basic_schedule(1.0, 2)
        assert prefactor_quadrature(s, NormalModel(1.0, 0.04), 1) == pytest.approx(0.04, rel=1e-12)
        assert prefactor_quadrature(s, NormalModel(1.0, 0.04), 2) == pytest.approx(3 * 0.04**2, rel=1e-12)

    def test_beta_quadrature_matches_scipy(self):
        s = basic_schedule(0.8, 4)
        m = BetaModel(2.0, 6.0, rescaled=True)
        ref = stats.beta(2.0, 6.0, scale=m.scale).expect(lambda t: (1 - 0.8 * t) ** 8)
        assert prefactor_quadrature(s, m, 4) == pytest.approx(ref, rel=1e-9)

    def test_empirical_and_standard_error(self):
        vals = stats.norm(1, 0.1).rvs(200_000, random_state=np.random.default_rng(8))
        d = empirical_summary(vals)
        s = basic_schedule(1.0, 1)
        val = prefactor_quadrature(s, d, 1)
        se = prefactor_standard_error(s, d, 1)
        assert abs(val - 0.01) < 4 * se
        assert se == pytest.approx(0.01 * math.sqrt(2 / 200_000), rel=0.05)
