"""Graph constructors used by the experiments and tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .spectral_core import InteractionGraph


def complete_graph(m: int) -> InteractionGraph:
    """All ``m(m-1)/2`` edges in lexicographic order."""
    return InteractionGraph(m, tuple(itertools.combinations(range(1, m + 1), 2)))


def path_graph(m: int) -> InteractionGraph:
    return InteractionGraph(m, tuple((i, i + 1) for i in range(1, m)))


def star_graph(m: int) -> InteractionGraph:
    return InteractionGraph(m, tuple((1, j) for j in range(2, m + 1)))


def _even_permutations(v):
    a, b, c = v
    return [(a, b, c), (b, c, a), (c, a, b)]


def truncated_icosahedron() -> InteractionGraph:
    """The C60 fullerene graph: 60 vertices of degree three, 90 edges.

    Vertices are the even coordinate permutations of ``(0, ±1, ±3p)``,
    ``(±1, ±(2+p), ±2p)`` and ``(±p, ±2, ±(2p+1))`` with ``p`` the golden
    ratio, sorted lexicographically; edges join points at distance 2.
    """
    p = (1 + math.sqrt(5)) / 2
    base = [(0.0, 1.0, 3 * p), (1.0, 2 + p, 2 * p), (p, 2.0, 2 * p + 1)]
    pts = set()
    for v in base:
        for signs in itertools.product((1, -1), repeat=3):
            w = tuple(s * x for s, x in zip(signs, v))
            for q in _even_permutations(w):
                pts.add(tuple(round(x, 12) + 0.0 for x in q))
    pts = sorted(pts)
    X = np.array(pts)
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    edges = [(i + 1, j + 1) for i in range(len(pts)) for j in range(i + 1, len(pts)) if abs(D[i, j] - 2.0) < 1e-9]
    return InteractionGraph(len(pts), tuple(edges))


def random_graph(m: int, edge_count: int, rng: np.random.Generator) -> InteractionGraph:
    """Uniformly random simple graph with a fixed number of edges."""
    pairs = list(itertools.combinations(range(1, m + 1), 2))
    if edge_count > len(pairs):
        raise ValueError(f"at most {len(pairs)} edges on {m} vertices")
    idx = rng.choice(len(pairs), size=edge_count, replace=False)
    return InteractionGraph(m, tuple(pairs[k] for k in sorted(idx)))
