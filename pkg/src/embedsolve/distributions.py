"""Analytic models for the angular distribution of ``||T^t eta||^2``.

Normal and (rescaled) beta densities, the exact law for orthogonal
projections, the exponential concentration bounds, the two-moment beta
fit and the singular tail-weight integral ``int_0^delta f(t)/t dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import EmpiricalDistribution
from .special import DivergentIntegralError, betainc, gk_quad, log_beta, norm_cdf

FEASIBILITY_SLACK = 0.0
LIMIT_GRID = np.round(np.arange(-40, 41) / 10.0, 10)


class InfeasibleMomentsError(ValueError):
    pass


@dataclass(frozen=True)
class NormalModel:
    E: float
    V: float

    def __post_init__(self):
        if not self.V > 0:
            raise ValueError("normal model needs V > 0")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.V)

    @property
    def support(self):
        return (-math.inf, math.inf)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-((t - self.E) ** 2) / (2 * self.V)) / math.sqrt(2 * math.pi * self.V)

    def cdf(self, t):
        return norm_cdf((np.asarray(t, dtype=float) - self.E) / self.sigma)


@dataclass(frozen=True)
class BetaModel:
    """Beta(alpha, beta) on (0, 1), or its mean-one rescaling on
    ``(0, (alpha + beta)/alpha)``."""

    alpha: float
    beta: float
    rescaled: bool = False

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("beta model needs alpha, beta > 0")

    @property
    def scale(self) -> float:
        # t_model = x_beta * scale
        return (self.alpha + self.beta) / self.alpha if self.rescaled else 1.0

    @property
    def support(self):
        return (0.0, self.scale)

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta) * self.scale

    @property
    def variance(self) -> float:
        a, b = self.alpha, self.beta
        return a * b / ((a + b) ** 2 * (a + b + 1)) * self.scale**2

    @property
    def third_moment(self) -> float:
        a, b = self.alpha, self.beta
        raw = 2 * (b - a) * math.sqrt(a + b + 1) / ((a + b + 2) * math.sqrt(a * b))
        return raw * (a * b / ((a + b) ** 2 * (a + b + 1))) ** 1.5 * self.scale**3

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        x = t / self.scale
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        logf = (self.alpha - 1) * np.log(xs) + (self.beta - 1) * np.log1p(-xs) - log_beta(self.alpha, self.beta)
        return np.where(inside, np.exp(logf) / self.scale, 0.0)

    def cdf(self, t):
        return betainc(self.alpha, self.beta, np.clip(np.asarray(t, dtype=float) / self.scale, 0.0, 1.0))


DensityModel = NormalModel | BetaModel | EmpiricalDistribution


def density_eval(model, t):
    return model.pdf(t)


def cdf_eval(model, t):
    return model.cdf(t)


def projection_cdf(m: int, n: int, delta):
    """Probability that ``||Px||^2 <= delta ||x||^2`` for uniform ``x`` and an
    orthogonal projection ``P`` of rank ``m`` on ``R^n``."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    d = np.asarray(delta, dtype=float)
    if np.any(d < 0) or np.any(d >= 1):
        raise ValueError("delta must lie in [0, 1)")
    return betainc(m / 2.0, (n - m) / 2.0, delta)


def concentration_phi(theta):
    theta = np.asarray(theta, dtype=float)
    return np.sqrt(theta) * np.exp((1.0 - theta) / 2.0)


def concentration_bound(m: int, n: int, delta: float, side: str):
    """``phi(delta/xi)^m`` with ``xi = m/n``: bounds the lower tail below ``xi``
    and the upper tail above it."""
    xi = m / n
    if side == "below":
        if not 0 < delta < xi:
            raise ValueError(f"side='below' needs 0 < delta < m/n = {xi}")
    elif side == "above":
        if not xi < delta < 1:
            raise ValueError(f"side='above' needs m/n = {xi} < delta < 1")
    else:
        raise ValueError("side must be 'below' or 'above'")
    return float(concentration_phi(delta / xi)) ** m


def rescaled_beta_cdf(alpha: float, beta: float, x):
    """Beta CDF in the standardized variable: ``B(alpha, beta; sigma x + E)``."""
    E = alpha / (alpha + beta)
    sigma = math.sqrt(alpha * beta / ((alpha + beta) ** 2 * (alpha + beta + 1)))
    return betainc(alpha, beta, np.clip(sigma * np.asarray(x, dtype=float) + E, 0.0, 1.0))


def normal_limit_distance(alpha: float, beta: float, grid=LIMIT_GRID) -> float:
    """Max distance between the standardized beta CDF and the standard normal
    CDF over a fixed grid in ``[-4, 4]``."""
    if not (alpha > 1 and beta > 1):
        raise ValueError("normal limit distance needs alpha, beta > 1")
    return float(np.max(np.abs(rescaled_beta_cdf(alpha, beta, grid) - norm_cdf(grid))))


def rescaled_beta_moments(alpha: float, beta: float) -> tuple[float, float]:
    """Variance and third central moment of the mean-one rescaled beta law."""
    V = beta / (alpha * (alpha + beta + 1))
    Z = 2 * beta * (beta - alpha) / (alpha**2 * (alpha + beta + 1) * (alpha + beta + 2))
    return V, Z


def fit_rescaled_beta(V: float, Z: float) -> tuple[float, float]:
    """Parameters of the mean-one rescaled beta law with variance ``V`` and
    third central moment ``Z``."""
    V, Z = float(V), float(Z)
    if not V > 0:
        raise InfeasibleMomentsError("variance must be positive")
    ratio = Z / (2 * V)
    lower = -(1 - V) / 2
    if not ratio > lower - FEASIBILITY_SLACK:
        raise InfeasibleMomentsError(
            f"lower feasibility bound violated: Z/(2V) = {ratio:.6g} <= -(1-V)/2 = {lower:.6g}"
        )
    if not ratio < V + FEASIBILITY_SLACK:
        raise InfeasibleMomentsError(f"upper feasibility bound violated: Z/(2V) = {ratio:.6g} >= V = {V:.6g}")
    alpha = 2 * (Z + V * (1 - V)) / (4 * V * V - (1 - V) * Z)
    beta = V * alpha * (alpha + 1) / (1 - V * alpha)
    if not (alpha > 0 and beta > 0 and math.isfinite(beta)):
        raise InfeasibleMomentsError(f"moments give no valid beta law (alpha={alpha}, beta={beta})")
    return alpha, beta


def _beta_tail_weight(model: BetaModel, delta: float) -> float:
    a, b, c = model.alpha, model.beta, model.scale
    if a <= 1:
        raise DivergentIntegralError(
            f"int_0^delta f(t)/t dt diverges for alpha = {a} <= 1 (needs m >= 3 for projections)"
        )
    top = min(delta, c)
    lb = log_beta(a, b)
    # t = top * u^p flattens the t^(alpha-2) endpoint behaviour
    p = 1.0 / (a - 1.0) if a < 2 else 1.0
    x_top = top / c

    def integrand(u):
        # f(t)/t dt = x^(a-2) (1-x)^(b-1) / (c B(a,b)) dx with x = t/c = x_top u^p
        x = x_top * u**p
        logv = (
            (a - 1) * math.log(x_top)
            + (p * (a - 1) - 1) * np.log(u)
            + (b - 1) * np.log1p(-x)
            - lb
        )
        return p * np.exp(logv) / c

    return gk_quad(integrand, 0.0, 1.0, abstol=1e-10)


def tail_weight(model, delta: float) -> float:
    """``int_0^delta f(t)/t dt`` for a density model on ``(0, inf)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(model, NormalModel):
        raise DivergentIntegralError("a normal density is positive at t = 0, so f(t)/t is not integrable")
    if isinstance(model, BetaModel):
        return _beta_tail_weight(model, float(delta))
    if isinstance(model, EmpiricalDistribution):
        edges, dens = model.bin_edges, model.density
        if model.degenerate:
            v = float(model.values[0])
            if v <= 0:
                raise DivergentIntegralError("point mass at t <= 0")
            return 1.0 / v if v <= delta else 0.0
        if edges[0] <= 0:
            raise DivergentIntegralError("histogram support reaches t = 0")
        lo = edges[:-1]
        hi = np.minimum(edges[1:], delta)
        mask = hi > lo
        return float(np.sum(dens[mask] * np.log(hi[mask] / lo[mask])))
    raise TypeError(f"unsupported model {type(model).__name__}")
