"""Embedding matrices built from interaction graphs and the moments of the
symbol ``||T^t w||^2`` on the unit sphere.

Everything here is a pure function of immutable inputs.  Graph-built
matrices carry their source graph so that traces can be evaluated in exact
rational arithmetic (``S = I + L/2`` has entries in ``Z/2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

SQRT_HALF = math.sqrt(0.5)
EXACT_MAX_M = 64


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected simple graph on vertices ``1..m``.

    Edges are stored as ordered pairs ``(i, j)`` with ``i < j`` in the order
    they were given.
    """

    m: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"vertex count must be a positive integer, got {self.m!r}")
        seen = set()
        normalized = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (1 <= i <= self.m and 1 <= j <= self.m):
                raise ValueError(f"edge ({i}, {j}) out of range 1..{self.m}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def n(self) -> int:
        return self.m + len(self.edges)

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.m, dtype=np.int64)
        for i, j in self.edges:
            d[i - 1] += 1
            d[j - 1] += 1
        return d

    def laplacian(self) -> np.ndarray:
        """Integer graph Laplacian ``D - A``."""
        L = np.diag(self.degrees())
        for i, j in self.edges:
            L[i - 1, j - 1] -= 1
            L[j - 1, i - 1] -= 1
        return L

    def is_complete(self) -> bool:
        return len(self.edges) == self.m * (self.m - 1) // 2


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Full-column-rank ``n x m`` matrix ``T`` with ``n > m``."""

    T: np.ndarray
    graph: InteractionGraph | None = field(default=None, compare=False)

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        if T.ndim != 2:
            raise ValueError("T must be a matrix")
        n, m = T.shape
        if not n > m >= 1:
            raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def m(self) -> int:
        return self.T.shape[1]

    def singular_values(self) -> np.ndarray:
        """Singular values in ascending order, from the eigenvalues of ``T^t T``."""
        lam = np.linalg.eigvalsh(self.T.T @ self.T)
        return np.sqrt(np.clip(lam, 0.0, None))

    def spectral_norm(self) -> float:
        return float(self.singular_values()[-1])

    def check_rank(self, rtol: float = 1e-12) -> None:
        sv = self.singular_values()
        if sv[0] <= rtol * sv[-1]:
            raise ValueError("T does not have full column rank")


@dataclass(frozen=True)
class GramSummary:
    S: np.ndarray
    A1: float | Fraction
    A2: float | Fraction
    A3: float | Fraction


@dataclass(frozen=True)
class MomentSummary:
    """Mean ``E``, variance ``V`` and third central moment ``Z`` of the symbol."""

    E: float | Fraction
    V: float | Fraction
    Z: float | Fraction | None = None
    n: int | None = None
    m: int | None = None

    def as_float(self) -> "MomentSummary":
        return MomentSummary(
            float(self.E), float(self.V), None if self.Z is None else float(self.Z), self.n, self.m
        )

    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in (self.E, self.V))


@dataclass(frozen=True)
class SignedPermutationLift:
    P: np.ndarray
    Q: np.ndarray
    epsilon: int


def build_graph_embedding(g: InteractionGraph) -> EmbeddingMatrix:
    """Identity rows for the vertices, then one ``(e_i - e_j)/sqrt(2)`` row per edge."""
    if not isinstance(g, InteractionGraph):
        raise TypeError("expected an InteractionGraph")
    if not g.edges:
        # n > m fails without edges
        raise ValueError("graph needs at least one edge for an n > m embedding")
    T = np.zeros((g.n, g.m))
    T[: g.m, : g.m] = np.eye(g.m)
    for row, (i, j) in enumerate(g.edges, start=g.m):
        T[row, i - 1] = SQRT_HALF
        T[row, j - 1] = -SQRT_HALF
    return EmbeddingMatrix(T, graph=g)


def gram_traces(T: EmbeddingMatrix, exact: bool | None = None) -> GramSummary:
    """Gram matrix ``S = T^t T`` and the traces of ``S``, ``S^2``, ``S^3``.

    With ``exact`` (default: on for graph matrices with ``m <= 64``) the
    traces are rationals computed from the integer matrix ``2S = 2I + L``.
    """
    if not isinstance(T, EmbeddingMatrix):
        T = EmbeddingMatrix(T)
    if exact is None:
        exact = T.graph is not None and T.graph.m <= EXACT_MAX_M
    if exact:
        if T.graph is None:
            raise ValueError("exact traces are only available for graph-built matrices")
        S2 = 2 * np.eye(T.graph.m, dtype=np.int64) + T.graph.laplacian()
        A1 = Fraction(int(np.trace(S2)), 2)
        A2 = Fraction(int((S2 * S2).sum()), 4)
        A3 = Fraction(int(np.trace(S2 @ S2 @ S2)), 8)
        S = (S2.astype(float)) / 2.0
    else:
        S = T.T.T @ T.T
        S = 0.5 * (S + S.T)
        A1 = float(np.trace(S))
        A2 = float(np.sum(S * S))
        A3 = float(np.trace(S @ S @ S))
    S.setflags(write=False)
    return GramSummary(S=S, A1=A1, A2=A2, A3=A3)


def moments_from_traces(A1, A2, A3, n: int, m: int | None = None) -> MomentSummary:
    """Mean, variance and third central moment of ``||T^t eta||^2`` on ``S^{n-1}``.

    Works unchanged on ``Fraction`` inputs, giving exact results.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    E = A1 / n
    V = (2 * n * A2 - 2 * A1 * A1) / (n * n * (n + 2))
    Z = None
    if A3 is not None:
        Z = (16 * A1**3 - 24 * n * A1 * A2 + 8 * n * n * A3) / (n**3 * (n + 2) * (n + 4))
    return MomentSummary(E=E, V=V, Z=Z, n=n, m=m)


def matrix_moments(T: EmbeddingMatrix, exact: bool | None = None) -> MomentSummary:
    gs = gram_traces(T, exact=exact)
    return moments_from_traces(gs.A1, gs.A2, gs.A3, T.n, T.m)


def mean_squared_degree(g: InteractionGraph) -> Fraction:
    d = g.degrees()
    return Fraction(int((d * d).sum()), g.m)


def graph_moments(g: InteractionGraph) -> MomentSummary:
    """Closed-form moments for a graph matrix: ``E = 1`` and ``V`` from the
    mean squared vertex degree.  ``Z`` comes from the exact traces."""
    if not g.edges:
        raise ValueError("graph needs at least one edge")
    n, m = g.n, g.m
    d2 = mean_squared_degree(g)
    V = ((d2 - 6) / 2 * Fraction(m, n) + 3) / (n + 2)
    exact = m <= EXACT_MAX_M
    gs = gram_traces(build_graph_embedding(g), exact=exact)
    Z = moments_from_traces(gs.A1, gs.A2, gs.A3, n, m).Z
    if not exact:
        V = float(V)
    return MomentSummary(E=Fraction(1) if exact else 1.0, V=V, Z=Z, n=n, m=m)


def projection_moments(m: int, n: int, rescaled: bool = False) -> tuple[Fraction, Fraction]:
    """Moments for an orthogonal projection ``R^n -> R^m``, optionally scaled
    by ``sqrt(n/m)`` to mean one."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    if rescaled:
        return Fraction(1), Fraction(n - m, n + 2) * Fraction(2, m)
    xi = Fraction(m, n)
    return xi, xi * (1 - xi) * Fraction(2, n + 2)


@dataclass(frozen=True)
class VarianceEnvelope:
    V_min: Fraction
    V_max: Fraction
    EX: Fraction
    VX: Fraction
    V_star: Fraction


def variance_envelope(m: int, n: int) -> VarianceEnvelope:
    """Range of the variance for mean-one matrices, statistics of
    ``X = sum eta_i^4`` over the unit sphere of ``R^m``, and the expected
    variance ``V*``.  ``V_max`` is a supremum, not attained."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    V_min = Fraction(n - m, n + 2) * Fraction(2, m)
    V_max = Fraction(2 * n - 2, n + 2)
    EX = Fraction(3, m + 2)
    VX = Fraction(24 * m - 24, (m + 2) ** 2 * (m + 4) * (m + 6))
    V_star = Fraction(2 * n, n + 2) * EX - Fraction(2, n + 2)
    return VarianceEnvelope(V_min, V_max, EX, VX, V_star)


def normalized_singular_values(T: EmbeddingMatrix) -> np.ndarray:
    return T.singular_values() / math.sqrt(T.n)


def quartic_statistic(eta: np.ndarray) -> np.ndarray:
    """``X(eta) = sum_i eta_i^4`` along the last axis."""
    eta = np.asarray(eta, dtype=float)
    return np.sum(eta**4, axis=-1)


def complete_graph_spectrum(m: int) -> np.ndarray:
    """Singular values of the complete-graph matrix, ascending."""
    if m < 2:
        raise ValueError("complete graph spectrum needs m >= 2")
    return np.array([1.0] + [math.sqrt((m + 2) / 2)] * (m - 1))


def _check_permutation(pi: Sequence[int], m: int) -> np.ndarray:
    p = np.asarray(pi, dtype=np.int64)
    if p.shape != (m,) or sorted(p.tolist()) != list(range(1, m + 1)):
        raise ValueError(f"not a permutation of 1..{m}: {list(pi)!r}")
    return p


def permutation_sign(pi: Sequence[int]) -> int:
    """Parity of a permutation of ``1..m`` via cycle decomposition."""
    p = [int(x) - 1 for x in pi]
    seen = [False] * len(p)
    sign = 1
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = p[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permutation_lift(g: InteractionGraph, pi: Sequence[int]) -> SignedPermutationLift:
    """Permutation matrix ``P`` with ``(Px)_i = x_{pi(i)}`` and its signed lift
    ``Q`` on ``R^n`` satisfying ``T P = Q T``.

    Only complete graphs are supported; for them every vertex permutation
    maps the edge set onto itself.
    """
    if not g.is_complete():
        raise ValueError("permutation lifts are defined for complete graphs only")
    m, n = g.m, g.n
    p = _check_permutation(pi, m)
    P = np.zeros((m, m))
    P[np.arange(m), p - 1] = 1.0
    Q = np.zeros((n, n))
    Q[np.arange(m), p - 1] = 1.0
    row_of = {e: m + k for k, e in enumerate(g.edges)}
    for (i, j), row in row_of.items():
        a, b = int(p[i - 1]), int(p[j - 1])
        if a < b:
            Q[row, row_of[(a, b)]] = 1.0
        else:
            Q[row, row_of[(b, a)]] = -1.0
    P.setflags(write=False)
    Q.setflags(write=False)
    return SignedPermutationLift(P=P, Q=Q, epsilon=permutation_sign(p))
