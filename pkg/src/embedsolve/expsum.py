"""Exponential-sum approximation of ``1/r`` and the Gauss-kernel coefficients
it induces for the resolvent ``1/(||w||^2 + mu)``.

``v(r) = h sum_{k=k1}^{k2} e^{-kh} exp(-e^{-kh} r)`` equals ``phi(ln r)/r``
with the window ``phi(s) = h sum_k varphi(s - kh)``,
``varphi(s) = exp(-e^s + s)``, so the relative error of ``v`` against ``1/r``
is ``|phi(ln r) - 1|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_H = 1.0
DEFAULT_K1 = -2
DEFAULT_K2 = 50


def window_term(s):
    s = np.asarray(s, dtype=float)
    return np.exp(s - np.exp(s))


@dataclass(frozen=True)
class ExpSumApprox:
    """``h``, summation range ``k1..k2`` and a scale ``mu`` (0 = unscaled)."""

    h: float = DEFAULT_H
    k1: int = DEFAULT_K1
    k2: int = DEFAULT_K2
    mu: float = 0.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.k1 > self.k2:
            raise ValueError("need k1 <= k2")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k1, self.k2 + 1)

    @property
    def scale(self) -> float:
        return self.mu if self.mu > 0 else 1.0

    def window(self, s):
        """``phi(s)``; the unscaled ``v`` is ``phi(ln r)/r``."""
        s = np.asarray(s, dtype=float)
        return self.h * window_term(s[..., None] - self.ks * self.h).sum(axis=-1)

    def direct(self, r):
        """Unscaled sum evaluated term by term."""
        r = np.asarray(r, dtype=float)
        e = np.exp(-self.ks * self.h)
        return self.h * (e * np.exp(-np.multiply.outer(r, e))).sum(axis=-1)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("v(r) is evaluated for r > 0 only")
        x = r / self.scale
        big = x > 1.0
        out = np.where(big, 0.0, 0.0)
        if np.any(~big):
            out = np.where(big, out, self.direct(np.where(big, 1.0, x)))
        if np.any(big):
            xb = np.where(big, x, 1.0)
            out = np.where(big, self.window(np.log(xb)) / xb, out)
        out = out / self.scale
        return out if out.ndim else float(out)

    def relative_error(self, r):
        """``|v(r) r - 1|`` through the window, without forming ``v``."""
        x = np.asarray(r, dtype=float) / self.scale
        return np.abs(self.window(np.log(x)) - 1.0)


def build_expsum(h: float = DEFAULT_H, k1: int = DEFAULT_K1, k2: int = DEFAULT_K2) -> ExpSumApprox:
    return ExpSumApprox(h, k1, k2)


def relative_error_scan(approx, r_lo: float, r_hi: float, points: int = 10_000):
    """Maximum relative error on log-equispaced points of ``[r_lo, r_hi]``.

    ``approx`` is an :class:`ExpSumApprox` or any callable approximating ``1/r``.
    Returns ``(max_error, r_at_max)``.
    """
    if not 0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    r = np.logspace(math.log10(r_lo), math.log10(r_hi), points)
    if isinstance(approx, ExpSumApprox):
        err = approx.relative_error(r)
    else:
        err = np.abs(np.asarray(approx(r), dtype=float) * r - 1.0)
    i = int(np.argmax(err))
    return float(err[i]), float(r[i])


def interior(r_lo: float, r_hi: float) -> tuple[float, float]:
    """The gated part of an interval: a decade trimmed from each end."""
    return 10.0 * r_lo, r_hi / 10.0


def predicted_relative_error(h: float) -> float:
    """Asymptotic relative error ``4 pi h^{-1/2} exp(-pi^2/h)`` of the infinite sum."""
    if not h > 0:
        raise ValueError("h must be positive")
    return 4 * math.pi * h**-0.5 * math.exp(-math.pi**2 / h)


def rescale_to_mu(approx: ExpSumApprox, mu: float) -> ExpSumApprox:
    """``r -> v(r/mu)/mu``: moves the accurate range from ``[1, R]`` to ``[mu, R mu]``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    return ExpSumApprox(approx.h, approx.k1, approx.k2, approx.scale * mu)


@dataclass(frozen=True)
class GaussKernelCoeffs:
    """``sum_k a_k exp(-beta_k (rho + mu))`` approximating ``1/(rho + mu)``."""

    a: np.ndarray
    beta: np.ndarray
    mu: float

    @property
    def folded_weights(self) -> np.ndarray:
        """``a_k e^{-beta_k mu}``, the weights of the product form."""
        return self.a * np.exp(-self.beta * self.mu)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return (self.folded_weights * np.exp(-np.multiply.outer(rho, self.beta))).sum(axis=-1)


def to_gauss_kernel(approx: ExpSumApprox, mu: float = 0.0) -> GaussKernelCoeffs:
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    e = np.exp(-approx.ks * approx.h)
    return GaussKernelCoeffs(a=approx.h * e / approx.scale, beta=e / approx.scale, mu=float(mu))


def fig4_data(approx: ExpSumApprox, s_lo: float = -1.0, s_hi: float = 19.0, points: int = 2001):
    """Rows ``(s, phi(s ln 10))`` of the window over decades of ``r``."""
    s = np.linspace(s_lo, s_hi, points)
    return s, approx.window(s * math.log(10.0))
