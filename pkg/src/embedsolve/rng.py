"""Seeded random streams.

Uniforms come from numpy's PCG64 bit generator; the per-chunk streams are
derived from one 64-bit seed with ``SeedSequence.spawn`` so chunked work is
reproducible regardless of how many threads consume the chunks.  Normal
variates use the polar Box-Muller method implemented here (not numpy's
ziggurat), and chi-square variates use either an exact sum of squares or
Marsaglia-Tsang gamma sampling.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "PCG64 + SeedSequence.spawn; polar Box-Muller normals; Marsaglia-Tsang gamma"
CHI2_EXACT_MAX_DOF = 64
DEFAULT_CHUNK = 1 << 16


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def chunk_generators(seed: int, count: int, chunk: int = DEFAULT_CHUNK):
    """Yield ``(index, size, generator)`` for ``count`` draws split into chunks."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    nchunks = max(1, -(-count // chunk))
    children = np.random.SeedSequence(int(seed)).spawn(nchunks)
    for i, child in enumerate(children):
        size = min(chunk, count - i * chunk)
        if size <= 0:
            break
        yield i, size, np.random.Generator(np.random.PCG64(child))


def normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal variates by the polar (Marsaglia) Box-Muller method."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(shape))
    out = np.empty(total)
    filled = 0
    while filled < total:
        need = total - filled
        pairs = int(need / 2 / 0.785) + 16
        uv = 2.0 * rng.random((pairs, 2)) - 1.0
        s = uv[:, 0] ** 2 + uv[:, 1] ** 2
        ok = (s > 0.0) & (s < 1.0)
        uv, s = uv[ok], s[ok]
        z = (uv * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
        take = min(need, z.size)
        out[filled : filled + take] = z[:take]
        filled += take
    return out.reshape(shape)


def gamma_mt(rng: np.random.Generator, shape_k: float, size: int) -> np.ndarray:
    """Gamma(shape_k, 1) variates, Marsaglia-Tsang squeeze method (``shape_k >= 1``)."""
    if shape_k < 1:
        raise ValueError("Marsaglia-Tsang sampler used only for shape >= 1")
    d = shape_k - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = need + need // 8 + 16
        x = normals(rng, batch)
        u = rng.random(batch)
        v = (1.0 + c * x) ** 3
        pos = v > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            accept = pos & (
                (u < 1.0 - 0.0331 * x**4)
                | (np.log(u) < 0.5 * x**2 + d * (1.0 - v + np.log(np.where(pos, v, 1.0))))
            )
        g = d * v[accept]
        take = min(need, g.size)
        out[filled : filled + take] = g[:take]
        filled += take
    return out


def chi2(rng: np.random.Generator, dof: int, size: int) -> np.ndarray:
    """Chi-square variates; exact sum of squares up to 64 degrees of freedom."""
    if dof < 0:
        raise ValueError("degrees of freedom must be nonnegative")
    if dof == 0:
        return np.zeros(size)
    if dof <= CHI2_EXACT_MAX_DOF:
        z = normals(rng, (size, dof))
        return np.einsum("ij,ij->i", z, z)
    return 2.0 * gamma_mt(rng, dof / 2.0, size)
