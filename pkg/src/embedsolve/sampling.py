"""Monte Carlo sampling of the symbol ``||T^t eta||^2`` over the unit sphere.

The default "trick" mode never materializes a point of ``S^{n-1}``: with
``T = Q Sigma W^t`` the symbol at a uniform point has the law of
``||Sigma_0 x||^2 / (||x||^2 + s)`` where ``x`` is standard normal in ``R^m``
and ``s`` is a single chi-square variate with ``n - m`` degrees of freedom.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng

DEFAULT_COUNT = 1_000_000
DEFAULT_BINS = 200


@dataclass(frozen=True)
class SphereSample:
    n: int
    points: np.ndarray
    seed: int


@dataclass(frozen=True)
class EmpiricalDistribution:
    values: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float
    third_moment: float
    degenerate: bool = False
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def density(self) -> np.ndarray:
        """Histogram heights normalized to unit total area."""
        if self.degenerate:
            return np.array([1.0])
        return self.counts / (self.count * self.widths)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return np.zeros_like(t)
        idx = np.searchsorted(self.bin_edges, t, side="right") - 1
        inside = (t >= self.bin_edges[0]) & (t <= self.bin_edges[-1])
        idx = np.clip(idx, 0, self.counts.size - 1)
        return np.where(inside, self.density[idx], 0.0)

    def cdf(self, t):
        """Empirical distribution function of the raw values."""
        s = np.sort(self.values)
        return np.searchsorted(s, np.asarray(t, dtype=float), side="right") / s.size

    def expectation(self, func) -> float:
        """Integral of ``func`` against the empirical measure (a sample mean)."""
        return float(np.mean(func(self.values)))

    def summary(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "z": self.third_moment,
            "count": self.count,
            "seed": self.seed,
        }


def _map_chunks(work, seed: int, count: int, threads: int = 1, chunk: int = _rng.DEFAULT_CHUNK):
    jobs = list(_rng.chunk_generators(seed, count, chunk))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: work(j[1], j[2]), jobs))
    else:
        parts = [work(size, g) for _, size, g in jobs]
    return parts


def sphere_sample(n: int, count: int, seed: int, threads: int = 1) -> SphereSample:
    """``count`` independent uniform points on ``S^{n-1}``."""
    if n < 1 or count < 1:
        raise ValueError("need n >= 1 and count >= 1")

    def work(size, g):
        z = _rng.normals(g, (size, n))
        norms = np.linalg.norm(z, axis=1)
        while np.any(norms == 0.0):  # probability zero
            bad = norms == 0.0
            z[bad] = _rng.normals(g, (int(bad.sum()), n))
            norms = np.linalg.norm(z, axis=1)
        return z / norms[:, None]

    pts = np.concatenate(_map_chunks(work, seed, count, threads))
    return SphereSample(n=n, points=pts, seed=seed)


def empirical_summary(values, bin_count: int = DEFAULT_BINS, seed: int | None = None) -> EmpiricalDistribution:
    """Moments and an equal-width histogram over ``[min, max]``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("need at least one value")
    mean = float(np.mean(v))
    d = v - mean
    var = float(np.mean(d * d))
    z = float(np.mean(d * d * d))
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return EmpiricalDistribution(
            values=v, bin_edges=np.array([lo, hi]), counts=np.array([v.size]),
            mean=mean, variance=var, third_moment=z, degenerate=True, seed=seed,
        )
    counts, edges = np.histogram(v, bins=bin_count, range=(lo, hi))
    return EmpiricalDistribution(
        values=v, bin_edges=edges, counts=counts, mean=mean, variance=var, third_moment=z, seed=seed
    )


def symbol_samples(
    singular_values,
    n: int,
    count: int = DEFAULT_COUNT,
    seed: int = 0,
    materialize_full: bool = False,
    bin_count: int = DEFAULT_BINS,
    threads: int = 1,
) -> EmpiricalDistribution:
    """Samples of ``||T^t eta||^2`` at uniform ``eta`` on ``S^{n-1}`` from the
    singular values of ``T``.

    The trick mode draws one chi-square scalar per sample for the
    ``n - m`` kernel directions; ``materialize_full`` draws them explicitly.
    """
    sig2 = np.asarray(singular_values, dtype=float) ** 2
    m = sig2.size
    if m > n:
        raise ValueError(f"need m <= n, got m={m}, n={n}")
    if np.any(sig2 <= 0):
        raise ValueError("singular values must be positive")
    k = n - m

    def work(size, g):
        x = _rng.normals(g, (size, m))
        x2 = x * x
        if materialize_full:
            y = _rng.normals(g, (size, k))
            s = np.einsum("ij,ij->i", y, y)
        else:
            s = _rng.chi2(g, k, size)
        # the same product form in numerator and denominator keeps unit
        # singular values exact
        return (x2 @ sig2) / (x2 @ np.ones(m) + s)

    vals = np.concatenate(_map_chunks(work, seed, count, threads))
    dist = empirical_summary(vals, bin_count, seed=seed)
    dist.meta.update(n=n, m=m, mode="full" if materialize_full else "trick", rng=_rng.ALGORITHM)
    return dist


def matrix_symbol_samples(T, count: int, seed: int, threads: int = 1) -> np.ndarray:
    """``||T^t eta||^2`` evaluated at explicit uniform points of the sphere."""
    T = np.asarray(T, dtype=float)
    pts = sphere_sample(T.shape[0], count, seed, threads).points
    w = pts @ T
    return np.einsum("ij,ij->i", w, w)


def quartic_samples(m: int, count: int, seed: int, threads: int = 1) -> np.ndarray:
    """``X(eta) = sum eta_i^4`` at uniform points of ``S^{m-1}``."""

    def work(size, g):
        z = _rng.normals(g, (size, m))
        z2 = z * z
        r2 = z2.sum(axis=1)
        return (z2 * z2).sum(axis=1) / (r2 * r2)

    return np.concatenate(_map_chunks(work, seed, count, threads))


def gauss_overlay(dist: EmpiricalDistribution, E: float, V: float) -> np.ndarray:
    """Normal density with mean ``E`` and variance ``V`` at the bin centers."""
    t = dist.bin_centers
    return np.exp(-((t - E) ** 2) / (2 * V)) / math.sqrt(2 * math.pi * V)
