"""Frequency-space simulation of the embedded Richardson-type iteration.

The iterates are never materialized.  The error obeys

    (U - U_k)^(w) = P_k(lambda(w)) U^(w),   lambda(w) = alpha(w) (||T^t w||^2 + mu),

so every error norm is an integral of ``|P_k(lambda)| |U^|`` that splits into
an angular Monte Carlo average and a radial integral.  For Gaussian profiles
the radial part has a gamma-function closed form when ``mu = 0`` and the exact
kernel is used; otherwise a generalized Gauss-Laguerre rule is applied.

All per-direction quantities are kept relative to a common ``log_scale`` so
that high dimensions neither overflow nor underflow; ratios never need it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_genlaguerre

from . import rng as _rng
from .expsum import ExpSumApprox
from .rates import RateSchedule
from .spectral_core import EmbeddingMatrix
from .special import DivergentIntegralError

SINGULAR_CUTOFF = 1e-14
EXCLUSION_REPORT_FRACTION = 1e-4
LAGUERRE_NODES = 64
DEFAULT_DIRECTIONS = 100_000
_SUBCHUNK = 4096


def log_sphere_area(n: int) -> float:
    """``log(n nu_n)``, the log area of the unit sphere in ``R^n``."""
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n)


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class RhsModel:
    """Fourier profile of the right-hand side, or of the solution itself.

    ``kind`` is ``'gaussian_radial'`` (``exp(-gamma ||w||^2)``),
    ``'separable_gaussian'`` (``exp(-sum gamma_i w_i^2)``) or ``'callable'``
    (``profile(r, eta)`` with ``r`` of shape ``(N, q)`` and ``eta`` of shape
    ``(N, n)``).  With ``is_solution`` the profile is ``U^`` and the
    right-hand side is ``(||T^t w||^2 + mu) U^``.
    """

    kind: str
    gamma: float | None = None
    gammas: tuple[float, ...] | None = None
    profile: Callable | None = None
    radial_scale: float = 1.0
    is_solution: bool = False

    def __post_init__(self):
        if self.kind == "gaussian_radial":
            if not (self.gamma and self.gamma > 0):
                raise ValueError("gaussian_radial needs gamma > 0")
        elif self.kind == "separable_gaussian":
            if not self.gammas or any(g <= 0 for g in self.gammas):
                raise ValueError("separable_gaussian needs positive gammas")
            object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        elif self.kind == "callable":
            if self.profile is None:
                raise ValueError("callable kind needs a profile")
        else:
            raise ValueError(f"unknown rhs kind {self.kind!r}")

    @classmethod
    def gaussian_radial(cls, gamma: float, is_solution: bool = False) -> "RhsModel":
        return cls("gaussian_radial", gamma=gamma, is_solution=is_solution)

    @classmethod
    def separable_gaussian(cls, gammas, is_solution: bool = False) -> "RhsModel":
        return cls("separable_gaussian", gammas=tuple(gammas), is_solution=is_solution)

    @property
    def gaussian(self) -> bool:
        return self.kind != "callable"

    @property
    def rotationally_symmetric(self) -> bool:
        return self.kind == "gaussian_radial" or (
            self.kind == "separable_gaussian" and len(set(self.gammas)) == 1
        )

    def gamma_vector(self, n: int) -> np.ndarray:
        if self.kind == "gaussian_radial":
            return np.full(n, self.gamma)
        if self.kind == "separable_gaussian":
            if len(self.gammas) != n:
                raise ValueError(f"need {n} gammas, got {len(self.gammas)}")
            return np.asarray(self.gammas)
        raise ValueError("callable profiles have no Gaussian exponents")

    def fhat(self, omega) -> np.ndarray:
        """The Gaussian profile at frequencies ``omega`` of shape ``(..., n)``."""
        omega = np.asarray(omega, dtype=float)
        g = self.gamma_vector(omega.shape[-1])
        return np.exp(-(omega * omega) @ g)


@dataclass(frozen=True)
class FrequencyEnsemble:
    """Uniform directions on ``S^{n-1}`` reduced to what the norms need.

    ``chi`` holds ``||T^t eta||^2`` and ``qform`` the Gaussian exponent
    ``sum gamma_i eta_i^2`` (constant for radial profiles).  Directions with
    ``chi`` below the singular cutoff are dropped and counted.
    """

    n: int
    m: int
    count: int
    seed: int
    chi: np.ndarray
    qform: np.ndarray | None
    directions: np.ndarray | None
    excluded: int
    radial_rule: str = "gamma closed form / generalized Gauss-Laguerre (64 nodes)"

    @property
    def used(self) -> int:
        return int(self.chi.size)

    @property
    def exclusion_reported(self) -> bool:
        return self.excluded > EXCLUSION_REPORT_FRACTION * self.count


def build_ensemble(
    T,
    count: int = DEFAULT_DIRECTIONS,
    seed: int = 0,
    rhs: RhsModel | None = None,
    store_directions: bool = False,
    threads: int = 1,
) -> FrequencyEnsemble:
    T = _as_matrix(T)
    n, m = T.shape
    g = rhs.gamma_vector(n) if (rhs is not None and rhs.kind == "separable_gaussian") else None
    keep = store_directions or (rhs is not None and rhs.kind == "callable")

    def work(size, gen):
        z = _rng.normals(gen, (size, n))
        eta = z / np.linalg.norm(z, axis=1)[:, None]
        w = eta @ T
        chi = np.einsum("ij,ij->i", w, w)
        q = (eta * eta) @ g if g is not None else None
        return chi, q, (eta if keep else None)

    from .sampling import _map_chunks

    parts = _map_chunks(work, seed, count, threads)
    chi = np.concatenate([p[0] for p in parts])
    q = np.concatenate([p[1] for p in parts]) if g is not None else None
    eta = np.concatenate([p[2] for p in parts]) if keep else None
    ok = chi >= SINGULAR_CUTOFF
    excluded = int(np.count_nonzero(~ok))
    return FrequencyEnsemble(
        n=n, m=m, count=count, seed=seed, chi=chi[ok],
        qform=None if q is None else q[ok], directions=None if eta is None else eta[ok],
        excluded=excluded,
    )


def _as_matrix(T) -> np.ndarray:
    # accepts an EmbeddingMatrix or a plain array
    if isinstance(T, EmbeddingMatrix):
        return T.T
    return np.asarray(T, dtype=float)


# -------------------------------------------------------------- pointwise


def symbol_eval(T, omega):
    """``||T^t omega||^2`` for ``omega`` of shape ``(..., n)``."""
    w = np.asarray(omega, dtype=float) @ _as_matrix(T)
    return np.einsum("...j,...j->...", w, w)


def _alpha(kernel, r2, mu):
    if kernel is None:
        return 1.0 / (r2 + mu)
    if isinstance(kernel, ExpSumApprox):
        return kernel(r2 + mu)
    return kernel(r2 + mu)


def error_multiplier(schedule: RateSchedule, k: int, T, mu: float, omega, kernel=None):
    """``P_k(alpha(w)(||T^t w||^2 + mu))``; ``kernel`` replaces ``1/(r + mu)``
    by an approximation of ``1/r`` evaluated at ``||w||^2 + mu``."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    omega = np.asarray(omega, dtype=float)
    r2 = np.einsum("...j,...j->...", omega, omega)
    chi = symbol_eval(T, omega)
    if mu == 0 and np.any(r2 == 0):
        raise ValueError("omega = 0 is not allowed for mu = 0")
    if mu == 0 and kernel is None:
        lam = chi / r2
    else:
        lam = _alpha(kernel, r2, mu) * (chi + mu)
    return schedule(k, lam)


# --------------------------------------------------------------- the run


@dataclass
class IterationRun:
    """Per-direction radial integrals of the error for ``k = 0..K``.

    ``phi[k]`` are the Barron-type radial integrals of ``|P_k U^|`` and
    ``psi[k]`` (when available) the squared-spectral ones of ``P_k^2 |U^|^2``,
    both relative to ``exp(log_scale)`` and ``exp(2 log_scale_h)``.
    """

    K: int
    s: float
    mu: float
    ensemble: FrequencyEnsemble
    phi: np.ndarray
    psi: np.ndarray | None
    log_scale: float
    log_scale_h: float
    mixed_available: bool
    multipliers: np.ndarray | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.phi.shape[1]

    def barron(self, k: int) -> float:
        return math.exp(self.log_scale) * float(self.phi[k].mean())

    def mixed(self, k: int) -> float:
        self._need_mixed()
        return math.exp(self.log_scale) * math.sqrt(float(np.mean(self.phi[k] ** 2)))

    def hilbert(self, k: int) -> float:
        if self.psi is None:
            raise ValueError("the squared-spectral seminorm was not computed")
        return math.exp(self.log_scale_h) * math.sqrt(float(self.psi[k].mean()))

    def _need_mixed(self):
        if not self.mixed_available:
            raise DivergentIntegralError("the mixed norm needs m >= 5 for this profile")

    @property
    def barron_errors(self) -> np.ndarray:
        return np.array([self.barron(k) for k in range(self.K + 1)])

    @property
    def mixed_errors(self) -> np.ndarray:
        return np.array([self.mixed(k) for k in range(self.K + 1)])

    # ratios with delta-method standard errors
    def barron_ratio(self, k: int) -> tuple[float, float]:
        """``||U - U_k|| / ||U||``."""
        return _ratio_se(self.phi[k], self.phi[0])

    def mixed_ratio_sq(self, k: int) -> tuple[float, float]:
        """``|||U - U_k|||^2 / |||U|||^2``."""
        self._need_mixed()
        return _ratio_se(self.phi[k] ** 2, self.phi[0] ** 2)

    def sharp_ratio(self, k: int) -> tuple[float, float]:
        """``||U - U_k||^2 / |||U|||^2``, the quantity bounded by the prefactor."""
        self._need_mixed()
        x, y = self.phi[k], self.phi[0] ** 2
        xm, ym = x.mean(), y.mean()
        R = xm * xm / ym
        z = (2 * xm / ym) * x - (xm * xm / (ym * ym)) * y
        return float(R), float(z.std() / math.sqrt(z.size))

    def hilbert_ratio_sq(self, k: int) -> tuple[float, float]:
        """``|U - U_k|_{2,s}^2 / |U|_{2,s}^2``."""
        if self.psi is None:
            raise ValueError("the squared-spectral seminorm was not computed")
        return _ratio_se(self.psi[k], self.psi[0])

    def chebyshev_split(self, schedule: RateSchedule, k: int, classical: bool = False) -> dict:
        """Both sides of ``||U_k - U|| <= bound ||U|| + ||U - U_rho||``.

        ``U_rho`` keeps the frequencies with ``lambda >= a``; only the angular
        case ``mu = 0`` with the exact kernel is supported.
        """
        if self.multipliers is None:
            raise ValueError("chebyshev split needs the angular form (mu = 0, exact kernel)")
        lam = self.ensemble.chi
        phi0 = self.phi[0]
        scale = math.exp(self.log_scale)
        lhs = scale * float(np.mean(np.abs(self.multipliers[k]) * phi0))
        bound = schedule.bound(k, classical=classical)
        main = bound * scale * float(phi0.mean())
        rest = scale * float(np.mean(phi0 * (lam < schedule.a)))
        return {"lhs": lhs, "bound": bound, "main": main, "remainder": rest, "rhs": main + rest}


def _ratio_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = float(x.mean()), float(y.mean())
    R = xm / ym
    z = x - R * y
    return R, float(z.std() / math.sqrt(z.size) / ym)


def _dimension_gate(m: int, power: int) -> None:
    need = 2 * power + 1
    if m < need:
        raise DivergentIntegralError(
            f"the weight ||T^t eta||^-{2 * power} is not integrable over the sphere for m = {m} < {need}"
        )


def run_iteration(
    T,
    mu: float,
    rhs: RhsModel,
    schedule: RateSchedule,
    ensemble: FrequencyEnsemble,
    s: float = 0.0,
    K: int | None = None,
    kernel=None,
    hilbert: bool = False,
    fourier_prefactor: bool = False,
    keep_multipliers: bool = True,
) -> IterationRun:
    """Error norms of the iteration for ``k = 0..K`` on a direction ensemble.

    ``fourier_prefactor`` multiplies every norm by ``(2 pi)^{-n/2}``.
    """
    T = _as_matrix(T)
    n, m = T.shape
    K = schedule.K if K is None else K
    if K > schedule.K:
        raise ValueError(f"K = {K} exceeds the schedule's {schedule.K}")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if ensemble.n != n:
        raise ValueError("ensemble dimension does not match T")
    chi = ensemble.chi
    N = chi.size
    angular = mu == 0 and kernel is None
    singular = angular and not rhs.is_solution
    if singular:
        _dimension_gate(m, 1)
    mixed_ok = not singular or m >= 5
    if hilbert and singular:
        _dimension_gate(m, 2)

    log_area = log_sphere_area(n)
    pref = -0.5 * n * math.log(2 * math.pi) if fourier_prefactor else 0.0

    if rhs.gaussian:
        q = ensemble.qform if rhs.kind == "separable_gaussian" else np.full(N, rhs.gamma)
        qref = float(np.exp(np.mean(np.log(q))))
        lq = np.log(q / qref)
    mults = None

    if angular and rhs.gaussian:
        # closed form: n nu_n int e^{-q r^2} r^{p-1} dr = n nu_n Gamma(p/2) / (2 q^{p/2})
        p = s + n - (2 if singular else 0)
        log_scale = log_area + math.lgamma(p / 2) - math.log(2) - (p / 2) * math.log(qref) + pref
        base = np.exp(-(p / 2) * lq)
        if singular:
            base = base / chi
        mults = schedule.all_degrees(chi)[: K + 1]
        phi = np.abs(mults) * base
        psi = None
        log_scale_h = 0.0
        if hilbert:
            p2 = 2 * s + n - (4 if singular else 0)
            log_h = log_area + math.lgamma(p2 / 2) - math.log(2) - (p2 / 2) * math.log(2 * qref) + 2 * pref
            b2 = np.exp(-(p2 / 2) * lq)
            if singular:
                b2 = b2 / chi**2
            psi = mults**2 * b2
            log_scale_h = 0.5 * log_h
    else:
        phi, psi, log_scale, log_scale_h = _radial_quadrature(
            T, mu, rhs, schedule, ensemble, s, K, kernel, hilbert, log_area, pref,
            qref if rhs.gaussian else None, lq if rhs.gaussian else None,
        )
        if angular:
            mults = schedule.all_degrees(chi)[: K + 1]
    return IterationRun(
        K=K, s=s, mu=mu, ensemble=ensemble, phi=phi, psi=psi, log_scale=log_scale,
        log_scale_h=log_scale_h, mixed_available=mixed_ok,
        multipliers=mults if keep_multipliers else None, seed=ensemble.seed,
        meta={"n": n, "m": m, "excluded": ensemble.excluded, "directions": ensemble.count,
              "exclusion_reported": ensemble.exclusion_reported, "schedule": schedule.kind},
    )


def _radial_quadrature(T, mu, rhs, schedule, ens, s, K, kernel, hilbert, log_area, pref, qref, lq):
    """Generalized Gauss-Laguerre in ``t = q r^2`` (Gaussian) or ``t = r/ell``.

    For a right-hand-side profile the resolvent factor is split as
    ``1/(r^2 chi + mu) = (q/(t chi)) * t chi/(t chi + q mu)``; the ``1/t`` goes
    into the Laguerre weight so the remaining factor stays bounded near 0.
    """
    n, chi, N = ens.n, ens.chi, ens.chi.size
    phi = np.empty((K + 1, N))
    psi = np.empty((K + 1, N)) if hilbert else None
    d = 0 if rhs.is_solution else 1

    def rule(a):
        t, w = roots_genlaguerre(LAGUERRE_NODES, a)
        return t, w / math.exp(math.lgamma(a + 1)), math.lgamma(a + 1)

    if rhs.gaussian:
        # (squared) radial integral with exponent q (resp. 2q) and power p
        e1 = -0.5 * (s + n) + d
        t1, w1, lg1 = rule(0.5 * (s + n) - 1 - d)
        log_scale = log_area + pref - math.log(2) + e1 * math.log(qref) + lg1
        if hilbert:
            e2 = -(s + 0.5 * n) + 2 * d
            t2, w2, lg2 = rule(s + 0.5 * n - 1 - 2 * d)
            log_h = log_area + 2 * pref - math.log(2) + e2 * math.log(2 * qref) + lg2
    else:
        ell = rhs.radial_scale
        t1, w1, lg1 = rule(s + n - 1.0)
        log_scale = log_area + pref + (s + n) * math.log(ell) + lg1
        if hilbert:
            t2, w2, lg2 = rule(2 * s + n - 1.0)
            log_h = log_area + 2 * pref + (2 * s + n) * math.log(ell) + lg2

    for lo in range(0, N, _SUBCHUNK):
        sl = slice(lo, min(N, lo + _SUBCHUNK))
        c = chi[sl][:, None]
        if rhs.gaussian:
            q = qref * np.exp(lq[sl])[:, None]
            r2 = t1[None, :] / q
            g = np.exp(e1 * lq[sl])[:, None] / c**d * (t1[None, :] * c / (t1[None, :] * c + q * mu)) ** d
        else:
            eta = ens.directions[sl]
            r = ell * t1[None, :] * np.ones_like(c)
            r2 = r * r
            g = np.abs(rhs.profile(r, eta)) * np.exp(t1)[None, :]
            if d:
                g = g / (r2 * c + mu)
        P = schedule.all_degrees(_lambda(kernel, r2, c, mu))[: K + 1]
        phi[:, sl] = np.einsum("kij,j,ij->ki", np.abs(P), w1, g)
        if hilbert:
            if rhs.gaussian:
                r2h = t2[None, :] / (2 * q)
                x = t2[None, :] * c
                gh = np.exp(e2 * lq[sl])[:, None] / c ** (2 * d) * (x / (x + 2 * q * mu)) ** (2 * d)
            else:
                rh = ell * t2[None, :] * np.ones_like(c)
                r2h = rh * rh
                gh = np.abs(rhs.profile(rh, eta)) ** 2 * np.exp(t2)[None, :]
                if d:
                    gh = gh / (r2h * c + mu) ** 2
            Ph = schedule.all_degrees(_lambda(kernel, r2h, c, mu))[: K + 1]
            psi[:, sl] = np.einsum("kij,j,ij->ki", Ph**2, w2, gh)
    return phi, psi, log_scale, (0.5 * log_h if hilbert else 0.0)


def _lambda(kernel, r2, chi, mu):
    return _alpha(kernel, r2, mu) * (r2 * chi + mu)


def norm_eval(rhs: RhsModel, T, mu: float, s: float, ensemble: FrequencyEnsemble, which: str = "barron",
              fourier_prefactor: bool = False) -> float:
    """``||U||_s`` (``'barron'``), ``|||U|||_s`` (``'mixed'``) or ``|U|_{2,s}`` (``'hilbert'``)."""
    from .rates import basic_schedule

    if which not in ("barron", "mixed", "hilbert"):
        raise ValueError("which must be 'barron', 'mixed' or 'hilbert'")
    run = run_iteration(T, mu, rhs, basic_schedule(1.0, 0), ensemble, s, 0,
                        hilbert=which == "hilbert", fourier_prefactor=fourier_prefactor)
    return {"barron": run.barron, "mixed": run.mixed, "hilbert": run.hilbert}[which](0)


# ----------------------------------------------------------- residual probe


@dataclass(frozen=True)
class ResidualEstimate:
    k: int | None
    point: tuple
    value: float
    stderr: float

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def inconclusive(self) -> bool:
        return self.stderr > 0.2 * abs(self.value)


def field_value(rhs: RhsModel, T, x) -> float:
    """``f(x) = F(Tx)`` for a separable Gaussian ``F^``, in the unitary convention."""
    g = rhs.gamma_vector(_as_matrix(T).shape[0])
    y = _as_matrix(T) @ np.asarray(x, dtype=float)
    return float(np.prod((2 * g) ** -0.5) * math.exp(-float(np.sum(y * y / (4 * g)))))


def residual_probe(
    T,
    mu: float,
    rhs: RhsModel,
    schedule: RateSchedule,
    points,
    ks,
    quad_count: int = 20_000,
    seed: int = 0,
    kernel=None,
) -> list[ResidualEstimate]:
    """``-Delta u_k + mu u_k - f`` at points ``x`` in ``R^m``.

    The residual's Fourier transform is ``-P_k(lambda) F^``, so with
    frequencies drawn from the Gaussian proportional to the profile the
    estimate is ``-F(0) mean(P_k(lambda) w cos(w . Tx))`` where ``w = 1`` for a
    right-hand-side profile and ``w = ||T^t w||^2 + mu`` for a solution
    profile.  ``k = None`` stands for the exact solution.  All ``k`` and points
    share one frequency sample.
    """
    if not mu > 0:
        raise ValueError("the residual probe needs mu > 0")
    if rhs.kind == "gaussian_radial":
        rhs = RhsModel.separable_gaussian([rhs.gamma] * _as_matrix(T).shape[0], rhs.is_solution)
    if rhs.kind != "separable_gaussian":
        raise ValueError("the residual probe needs a separable Gaussian profile")
    Tm = _as_matrix(T)
    n = Tm.shape[0]
    g = rhs.gamma_vector(n)
    gen = _rng.generator(seed)
    omega = _rng.normals(gen, (quad_count, n)) / np.sqrt(2 * g)
    r2 = np.einsum("ij,ij->i", omega, omega)
    chi = symbol_eval(Tm, omega)
    lam = _alpha(kernel, r2, mu) * (chi + mu)
    weight = (chi + mu) if rhs.is_solution else np.ones_like(chi)
    f0 = float(np.prod((2 * g) ** -0.5))
    out = []
    for x in points:
        phase = np.cos(omega @ (Tm @ np.asarray(x, dtype=float)))
        for k in ks:
            if k is None:
                vals = np.zeros(quad_count)
            else:
                vals = -f0 * schedule(k, lam) * weight * phase
            out.append(ResidualEstimate(k=k, point=tuple(np.asarray(x, dtype=float)), value=float(vals.mean()),
                                        stderr=float(vals.std() / math.sqrt(quad_count))))
    return out
