"""Special functions and quadrature used by the distribution models."""

from __future__ import annotations

import math

import numpy as np

_FPMIN = 1e-300
_EPS = 1e-16


class DivergentIntegralError(ArithmeticError):
    """Raised when an integral is known to diverge."""


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float, max_iter: int = 20000) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _betainc_scalar(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, 1.0 - x) / b


def betainc(a: float, b: float, x):
    """Regularized incomplete beta ``I_x(a, b)``, clipped to 0/1 outside [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("incomplete beta needs a, b > 0")
    if np.ndim(x) == 0:
        return _betainc_scalar(float(a), float(b), float(x))
    xs = np.asarray(x, dtype=float)
    return np.array([_betainc_scalar(a, b, v) for v in xs.ravel()]).reshape(xs.shape)


def norm_cdf(x):
    """Standard normal distribution function through ``erfc``."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    xs = np.asarray(x, dtype=float)
    return np.array([0.5 * math.erfc(-v / math.sqrt(2.0)) for v in xs.ravel()]).reshape(xs.shape)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points are the odd-indexed Kronrod nodes (x_1, x_3, x_5, 0)
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[13, 11, 9]] = _WG[:3]
_GWEIGHTS[7] = _WG[3]


def _gk15(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    k = h * float(fx @ _KWEIGHTS)
    g = h * float(fx @ _GWEIGHTS)
    return k, abs(k - g)


def gk_quad(f, a: float, b: float, abstol: float = 1e-10, reltol: float = 1e-12, max_intervals: int = 4000) -> float:
    """Adaptive Gauss-Kronrod 15-point quadrature with recursive bisection.

    ``f`` must accept a numpy array of nodes.  Endpoints are never sampled.
    """
    total, err = _gk15(f, a, b)
    intervals = [(err, a, b, total)]
    tot_err = err
    while tot_err > max(abstol, reltol * abs(total)):
        if len(intervals) >= max_intervals:
            raise ArithmeticError(f"quadrature did not reach tolerance (error {tot_err:.3g})")
        intervals.sort(key=lambda t: t[0])
        e, lo, hi, val = intervals.pop()
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        intervals += [(e1, lo, mid, v1), (e2, mid, hi, v2)]
        total += v1 + v2 - val
        tot_err += e1 + e2 - e
    return float(sum(t[3] for t in intervals))
