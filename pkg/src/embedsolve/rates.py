"""Error polynomials ``P_k`` with ``P_k(0) = 1`` and their reduction factors.

The optimal polynomials minimize ``int P_k(t)^2 f(t) dt`` for a weight
``f``; in terms of the orthonormal polynomials ``p_j`` of ``f`` they are
``P_k = M_k sum_j p_j(0) p_j`` with ``1/M_k = sum_j p_j(0)^2``.  Two weight
families are supported: normal densities centered at one (Hermite) and
beta densities, optionally rescaled to mean one (Jacobi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .distributions import BetaModel, NormalModel
from .sampling import EmpiricalDistribution
from .special import gk_quad

MAX_DEGREE = 64
_RESCALE_AT = 2.0**400
_LOG2 = math.log(2.0)


def hermite_He(k: int, x):
    """Probabilists' Hermite polynomial ``He_k(x)`` by the three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if k == 0:
        return prev if prev.ndim else float(prev)
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur if cur.ndim else float(cur)


def _logsumexp_prefix(logs: np.ndarray) -> np.ndarray:
    out = np.empty_like(logs)
    acc = -math.inf
    for i, v in enumerate(logs):
        acc = np.logaddexp(acc, v)
        out[i] = acc
    return out


def _hermite_log_p0(sigma: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """``log p_j(0)^2`` and ``sign p_j(0)`` for ``p_j(t) = He_j((t-1)/sigma)/sqrt(j!)``.

    Runs the normalized recurrence at ``x = -1/sigma`` carrying a separate
    binary exponent, so no intermediate value overflows.
    """
    x = -1.0 / sigma
    logs = np.empty(K + 1)
    signs = np.empty(K + 1)
    prev, cur, e = 0.0, 1.0, 0
    logs[0], signs[0] = 0.0, 1.0
    for j in range(K):
        prev, cur = cur, (x * cur - math.sqrt(j) * prev) / math.sqrt(j + 1)
        if abs(cur) > _RESCALE_AT:
            prev, cur = math.ldexp(prev, -400), math.ldexp(cur, -400)
            e += 400
        logs[j + 1] = 2.0 * (math.log(abs(cur)) + e * _LOG2) if cur != 0 else -math.inf
        signs[j + 1] = math.copysign(1.0, cur)
    return logs, signs


def _jacobi_log_p0(alpha: float, beta: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """``log p_j(0)^2`` by the stable forward recursion from ``p_0(0)^2 = 1``."""
    a, b = beta - 1.0, alpha - 1.0
    logs = np.empty(K + 1)
    logs[0] = 0.0
    for k in range(K):
        ratio = (k + b + 1) * (k + a + b + 1) * (2 * k + a + b + 3) / ((k + 1) * (k + a + 1) * (2 * k + a + b + 1))
        logs[k + 1] = logs[k] + math.log(ratio)
    signs = np.array([(-1.0) ** k for k in range(K + 1)])
    return logs, signs


def jacobi_p0_squared_closed(alpha: float, beta: float, k: int) -> float:
    """Gamma-function closed form of ``p_k(0)^2`` for the beta weight."""
    if k == 0:
        # the generic form hits (a+b+1) Gamma(a+b+1) at a pole when alpha + beta <= 1
        return 1.0
    a, b = beta - 1.0, alpha - 1.0
    lg = math.lgamma
    val = (
        math.log(2 * k + a + b + 1)
        + lg(a + 1) + lg(k + b + 1) + lg(k + a + b + 1)
        - lg(a + b + 2) - lg(b + 1) - lg(k + 1) - lg(k + a + 1)
    )
    return math.exp(val)


def _factors_from_logs(logs: np.ndarray) -> np.ndarray:
    return np.exp(-_logsumexp_prefix(logs))


def mk_normal(sigma: float, K: int) -> np.ndarray:
    """Reduction factors ``M_0..M_K`` for the normal weight with mean one and
    standard deviation ``sigma``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not 0 <= K <= MAX_DEGREE:
        raise ValueError(f"K must lie in 0..{MAX_DEGREE}")
    return _factors_from_logs(_hermite_log_p0(sigma, K)[0])


def mk_beta(alpha: float, beta: float, K: int) -> np.ndarray:
    """Reduction factors for a beta weight.  The values do not depend on a
    rescaling of the variable, so they serve both beta models."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha, beta must be positive")
    if not 0 <= K <= MAX_DEGREE:
        raise ValueError(f"K must lie in 0..{MAX_DEGREE}")
    return _factors_from_logs(_jacobi_log_p0(alpha, beta, K)[0])


def _jacobi_values(k_max: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    """``P_j^{(a,b)}(x)`` for ``j = 0..k_max``, standard normalization."""
    out = np.empty((k_max + 1,) + x.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = (a + 1) + (a + b + 2) * (x - 1) / 2
    for n in range(2, k_max + 1):
        s = 2 * n + a + b
        c1 = 2 * n * (n + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c3 = 2 * (n + a - 1) * (n + b - 1) * s
        out[n] = (c2 * out[n - 1] - c3 * out[n - 2]) / c1
    return out


def _jacobi_log_norm(k: int, a: float, b: float) -> float:
    lg = math.lgamma
    return (
        (a + b + 1) * _LOG2 + lg(k + a + 1) + lg(k + b + 1)
        - math.log(2 * k + a + b + 1) - lg(k + 1) - lg(k + a + b + 1)
    )


@dataclass(frozen=True)
class OrthogonalFamily:
    """Orthonormal polynomials for a normal (``kind='hermite'``) or beta
    (``kind='jacobi'``) weight."""

    kind: str
    sigma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    rescaled: bool = True

    def __post_init__(self):
        if self.kind == "hermite":
            if not (self.sigma and self.sigma > 0):
                raise ValueError("hermite family needs sigma > 0")
        elif self.kind == "jacobi":
            if not (self.alpha and self.beta and self.alpha > 0 and self.beta > 0):
                raise ValueError("jacobi family needs alpha, beta > 0")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    @classmethod
    def hermite(cls, sigma: float) -> "OrthogonalFamily":
        return cls("hermite", sigma=sigma)

    @classmethod
    def jacobi(cls, alpha: float, beta: float, rescaled: bool = True) -> "OrthogonalFamily":
        return cls("jacobi", alpha=alpha, beta=beta, rescaled=rescaled)

    def weight(self):
        if self.kind == "hermite":
            return NormalModel(1.0, self.sigma**2)
        return BetaModel(self.alpha, self.beta, self.rescaled)

    def log_p0_squared(self, K: int):
        if self.kind == "hermite":
            return _hermite_log_p0(self.sigma, K)
        return _jacobi_log_p0(self.alpha, self.beta, K)

    def reduction_factors(self, K: int) -> np.ndarray:
        return _factors_from_logs(self.log_p0_squared(K)[0])

    def values(self, K: int, t) -> np.ndarray:
        """Array of ``p_j(t)``, ``j = 0..K``, stacked along the first axis."""
        t = np.asarray(t, dtype=float)
        if self.kind == "hermite":
            x = (t - 1.0) / self.sigma
            out = np.empty((K + 1,) + t.shape)
            out[0] = 1.0
            if K >= 1:
                out[1] = x
            for j in range(1, K):
                out[j + 1] = (x * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
            return out
        a, b = self.beta - 1.0, self.alpha - 1.0
        scale = (self.alpha + self.beta) / self.alpha if self.rescaled else 1.0
        x = -1.0 + 2.0 * t / scale
        P = _jacobi_values(K, a, b, x)
        ln0 = _jacobi_log_norm(0, a, b)
        for j in range(K + 1):
            P[j] *= math.exp(0.5 * (ln0 - _jacobi_log_norm(j, a, b)))
        return P


def optimal_coefficients(family: OrthogonalFamily, k: int) -> np.ndarray:
    """``c_j = M_k p_j(0)`` so that ``P_k = sum_j c_j p_j``."""
    logs, signs = family.log_p0_squared(k)
    lse = _logsumexp_prefix(logs)[-1]
    return signs * np.exp(0.5 * logs - lse)


def optimal_polynomial(family: OrthogonalFamily, k: int) -> Callable:
    """Evaluator of the minimizing polynomial of degree ``k``."""
    if not 0 <= k <= MAX_DEGREE:
        raise ValueError(f"k must lie in 0..{MAX_DEGREE}")
    coef = optimal_coefficients(family, k)

    def P(t):
        return np.tensordot(coef, family.values(k, t), axes=1)

    return P


@dataclass(frozen=True)
class RateSchedule:
    """A sequence of polynomials ``P_0..P_K`` with ``P_k(0) = 1``.

    ``kind`` is ``'basic'`` (``(1 - theta t)^k``), ``'chebyshev'`` (shifted
    Chebyshev polynomials on ``[a, b]``) or ``'optimal'``.
    """

    kind: str
    K: int
    theta: float | None = None
    a: float | None = None
    b: float | None = None
    family: OrthogonalFamily | None = None
    M: np.ndarray | None = field(default=None, compare=False)

    def __call__(self, k: int, lam):
        if not 0 <= k <= self.K:
            raise ValueError(f"degree {k} outside 0..{self.K}")
        lam = np.asarray(lam, dtype=float)
        if self.kind == "basic":
            return (1.0 - self.theta * lam) ** k
        if self.kind == "chebyshev":
            return _chebyshev_ratio(k, self.a, self.b, lam)
        coef = optimal_coefficients(self.family, k)
        return np.tensordot(coef, self.family.values(k, lam), axes=1)

    def all_degrees(self, lam) -> np.ndarray:
        """``P_k(lam)`` for ``k = 0..K`` stacked along the first axis."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == "optimal":
            vals = self.family.values(self.K, lam)
            out = np.empty_like(vals)
            for k in range(self.K + 1):
                out[k] = np.tensordot(optimal_coefficients(self.family, k), vals[: k + 1], axes=1)
            return out
        return np.stack([self(k, lam) for k in range(self.K + 1)])

    @property
    def kappa(self) -> float | None:
        return None if self.kind != "chebyshev" else self.b / self.a

    @property
    def r(self) -> float | None:
        return None if self.kind != "chebyshev" else chebyshev_rate(self.kappa)

    def bound(self, k: int, classical: bool = False) -> float:
        """Bound on ``|P_k|`` over ``[a, b]`` for a Chebyshev schedule.

        The default is the form ``2 r^k / (1 + 2 r^{2k})``; ``classical``
        gives the exact maximum ``2 r^k / (1 + r^{2k})``.
        """
        if self.kind != "chebyshev":
            raise ValueError("bounds exist for Chebyshev schedules only")
        r = self.r
        return 2 * r**k / (1 + (1 if classical else 2) * r ** (2 * k))


def chebyshev_rate(kappa: float) -> float:
    sk = math.sqrt(kappa)
    return (sk - 1) / (sk + 1)


def _chebyshev_T(k: int, z):
    prev, cur = np.ones_like(z), z
    if k == 0:
        return prev
    for _ in range(1, k):
        prev, cur = cur, 2 * z * cur - prev
    return cur


def _chebyshev_ratio(k: int, a: float, b: float, lam):
    z = (b + a - 2 * lam) / (b - a)
    z0 = (b + a) / (b - a)
    return _chebyshev_T(k, z) / _chebyshev_T(k, np.asarray(z0))


def basic_schedule(theta: float, K: int) -> RateSchedule:
    return RateSchedule("basic", K, theta=theta)


def chebyshev_schedule(rho: float, spectral_norm_sq: float, K: int) -> RateSchedule:
    """Chebyshev polynomials transformed to ``[1 - rho, ||T^t||^2]``."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    a, b = 1.0 - rho, float(spectral_norm_sq)
    if a >= b:
        raise ValueError(f"interval is empty: a = {a} >= b = {b}")
    return RateSchedule("chebyshev", K, a=a, b=b)


def optimal_schedule(family: OrthogonalFamily, K: int) -> RateSchedule:
    if not 0 <= K <= MAX_DEGREE:
        raise ValueError(f"K must lie in 0..{MAX_DEGREE}")
    return RateSchedule("optimal", K, family=family, M=family.reduction_factors(K))


def _poly_evaluator(schedule, k):
    if isinstance(schedule, RateSchedule):
        return lambda t: schedule(k, t)
    return schedule


def prefactor_quadrature(schedule, model, k: int, nodes: int | None = None) -> float:
    """``int P_k(t)^2 f(t) dt`` for a density model.

    Gauss-Hermite for normal models and Gauss-Jacobi for beta models (both
    exact for polynomial ``P_k``); the sample mean for empirical models.
    ``schedule`` may be a :class:`RateSchedule` or any vectorized callable.
    """
    P = _poly_evaluator(schedule, k)
    if isinstance(model, NormalModel):
        N = nodes or 2 * k + 8
        x, w = np.polynomial.hermite_e.hermegauss(N)
        w = w / math.sqrt(2 * math.pi)
        return float(np.sum(w * P(model.E + model.sigma * x) ** 2))
    if isinstance(model, BetaModel):
        N = nodes or k + 8
        x, w = roots_jacobi(N, model.beta - 1.0, model.alpha - 1.0)
        if np.all(np.isfinite(w)) and w.sum() > 0:
            t = model.scale * (x + 1.0) / 2.0
            return float(np.sum(w * P(t) ** 2) / w.sum())
        lo, hi = model.support
        return gk_quad(lambda t: P(t) ** 2 * model.pdf(t), lo, hi)
    if isinstance(model, EmpiricalDistribution):
        return model.expectation(lambda v: P(v) ** 2)
    raise TypeError(f"unsupported model {type(model).__name__}")


def prefactor_standard_error(schedule, dist: EmpiricalDistribution, k: int) -> float:
    """Monte Carlo standard error of the empirical prefactor."""
    P = _poly_evaluator(schedule, k)
    v = P(dist.values) ** 2
    return float(np.std(v) / math.sqrt(v.size))
