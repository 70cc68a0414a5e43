"""``embedsolve`` command line: seeded experiments emitting CSV or JSON.

Exit codes: 0 success, 1 infeasible parameters, 2 input errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import rng as _rng
from .distributions import (
    InfeasibleMomentsError,
    NormalModel,
    concentration_bound,
    fit_rescaled_beta,
    projection_cdf,
)
from .expsum import ExpSumApprox, fig4_data, predicted_relative_error, rescale_to_mu
from .io import GraphFormatError, read_graph, write_artifact
from .rates import (
    OrthogonalFamily,
    basic_schedule,
    chebyshev_schedule,
    mk_beta,
    mk_normal,
    optimal_schedule,
    prefactor_quadrature,
    prefactor_standard_error,
)
from .sampling import gauss_overlay, symbol_samples
from .solver import RhsModel, build_ensemble, run_iteration
from .spectral_core import build_graph_embedding, graph_moments, moments_from_traces

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 1, 2
TABLE1_SIGMAS = (("sigma_1_16", 1 / 16), ("sigma_1_32", 1 / 32), ("sigma_1_64", 1 / 64))


class InputError(Exception):
    pass


def _meta(args, **extra) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    meta = {"command": args.command, "config": cfg, "seed": args.seed, "rng": _rng.ALGORITHM, "version": __version__}
    meta.update(extra)
    return meta


def _emit(args, columns, rows, **extra):
    write_artifact(columns, rows, _meta(args, **extra), out=args.out, fmt_name=args.format)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from None


# ------------------------------------------------------------- commands


def cmd_graph(args):
    g = read_graph(args.graph)
    if not g.edges:
        raise InputError(f"{args.graph}: graph has no edges")
    mom = graph_moments(g)
    d = g.degrees()
    rows = []
    for name, val in (("n", mom.n), ("m", mom.m), ("E", mom.E), ("V", mom.V), ("Z", mom.Z)):
        exact = str(val) if isinstance(val, (int, Fraction)) else ""
        rows.append((name, exact, float(val)))
    rows += [
        ("edges", str(len(g.edges)), float(len(g.edges))),
        ("degree_min", str(int(d.min())), float(d.min())),
        ("degree_max", str(int(d.max())), float(d.max())),
        ("degree_mean", str(Fraction(int(d.sum()), g.m)), float(d.mean())),
        ("degree_sq_mean", str(Fraction(int((d * d).sum()), g.m)), float((d * d).mean())),
    ]
    _emit(args, ("quantity", "exact", "value"), rows)


def _sample_source(args):
    """Singular values, ``n`` and reference moments ``(E, V)`` of the source."""
    chosen = [x is not None for x in (args.graph, args.projection, args.singular_values)]
    if sum(chosen) != 1:
        raise InputError("give exactly one of --graph, --projection, --singular-values")
    if args.graph is not None:
        g = read_graph(args.graph)
        T = build_graph_embedding(g)
        mom = graph_moments(g)
        return T.singular_values(), T.n, float(mom.E), float(mom.V)
    if args.projection is not None:
        m, n = args.projection
        sv = np.ones(m)
    else:
        sv = np.array(_float_list(args.singular_values))
        if args.n is None:
            raise InputError("--singular-values needs --n")
        n = args.n
    s2 = sv**2
    mom = moments_from_traces(float(s2.sum()), float((s2 * s2).sum()), None, n, sv.size)
    return sv, n, float(mom.E), float(mom.V)


def cmd_sample(args):
    sv, n, E, V = _sample_source(args)
    dist = symbol_samples(sv, n, args.count, args.seed, args.full, args.bins, args.threads)
    extra = {"summary": dist.summary(), "reference": {"E": E, "V": V}}
    if args.fig1:
        overlay = gauss_overlay(dist, E, V)
        rows = zip(dist.bin_centers, dist.density, overlay)
        _emit(args, ("bin_center", "density", "gauss"), list(rows), **extra)
    else:
        _emit(args, ("bin_center", "density"), list(zip(dist.bin_centers, dist.density)), **extra)


def cmd_project(args):
    m, n = args.m, args.n
    xi = m / n
    if args.fig3:
        rows = []
        for d in np.linspace(0, xi, args.points + 2)[1:-1]:
            rows.append(("below", d, projection_cdf(m, n, d), concentration_bound(m, n, d, "below")))
        for d in np.linspace(xi, 1, args.points + 2)[1:-1]:
            rows.append(("above", d, 1 - projection_cdf(m, n, d), concentration_bound(m, n, d, "above")))
        _emit(args, ("side", "delta", "tail_probability", "bound"), rows)
        return
    dist = symbol_samples(np.ones(m), n, args.count, args.seed, False, args.bins, args.threads)
    grid = np.linspace(0, 1, args.points + 1)[:-1]
    rows = list(zip(grid, dist.cdf(grid), projection_cdf(m, n, grid)))
    _emit(args, ("delta", "empirical_cdf", "beta_cdf"), rows, summary=dist.summary())


def cmd_rates(args):
    if args.table1:
        K = 12
        cols = [mk_normal(s, K) for _, s in TABLE1_SIGMAS]
        rows = [(k, *(c[k] for c in cols)) for k in range(1, K + 1)]
        _emit(args, ("k",) + tuple(name for name, _ in TABLE1_SIGMAS), rows)
        return
    if args.family == "normal":
        if args.sigma is None:
            raise InputError("--family normal needs --sigma")
        M = mk_normal(args.sigma, args.k)
        params = {"sigma": args.sigma}
    else:
        if args.moments is not None:
            a, b = fit_rescaled_beta(*args.moments)
        elif args.alpha is not None and args.beta is not None:
            a, b = args.alpha, args.beta
        else:
            raise InputError("--family beta needs --alpha and --beta, or --moments V Z")
        M = mk_beta(a, b, args.k)
        params = {"alpha": a, "beta": b}
    _emit(args, ("k", "M_k"), [(k, M[k]) for k in range(1, args.k + 1)], family=args.family, parameters=params)


def cmd_expsum(args):
    approx = ExpSumApprox(args.h, args.k1, args.k2)
    if args.mu is not None:
        approx = rescale_to_mu(approx, args.mu)
    if args.fig4:
        s, phi = fig4_data(approx, args.s_lo, args.s_hi, args.points)
        _emit(args, ("s", "phi"), list(zip(s, phi)))
        return
    if not 0 < args.r_lo < args.r_hi:
        raise InputError("need 0 < --r-lo < --r-hi")
    r = np.logspace(math.log10(args.r_lo), math.log10(args.r_hi), args.points)
    err = approx.relative_error(r)
    _emit(args, ("r", "v", "rel_err"), list(zip(r, approx(r), err)),
          max_rel_err=float(err.max()), predicted=predicted_relative_error(args.h))


def cmd_iterate(args):
    g = read_graph(args.graph)
    T = build_graph_embedding(g)
    mom = graph_moments(g)
    V = float(mom.V)
    b = T.spectral_norm() ** 2
    if args.schedule == "optimal":
        sigma = args.sigma if args.sigma is not None else math.sqrt(V)
        sched = optimal_schedule(OrthogonalFamily.hermite(sigma), args.K)
    elif args.schedule == "chebyshev":
        sched = chebyshev_schedule(args.rho, b, args.K)
    else:
        sched = basic_schedule(args.theta if args.theta is not None else 1.0 / b, args.K)
    rhs = RhsModel.gaussian_radial(args.gamma)
    ens = build_ensemble(T, args.directions, args.seed, rhs, threads=args.threads)
    run = run_iteration(T, args.mu, rhs, sched, ens, args.s, args.K)
    # the prefactor density comes from an independent stream
    dist = symbol_samples(T.singular_values(), T.n, args.prefactor_count, args.seed + 1, threads=args.threads)
    normal = NormalModel(1.0, V)
    rows = []
    for k in range(args.K + 1):
        pf = prefactor_quadrature(sched, dist, k)
        pf_se = prefactor_standard_error(sched, dist, k)
        R, R_se = run.sharp_ratio(k)
        ratio = R / pf
        ratio_se = ratio * math.hypot(R_se / R if R else 0.0, pf_se / pf if pf else 0.0)
        rows.append((k, run.barron(k), run.mixed(k), prefactor_quadrature(sched, normal, k), pf, ratio, ratio_se))
    _emit(args, ("k", "error_norm", "mixed_error", "predicted_Mk", "prefactor", "ratio", "ratio_se"), rows,
          excluded=ens.excluded, exclusion_reported=ens.exclusion_reported, n=T.n, m=T.m)


# --------------------------------------------------------------- parser


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="64-bit RNG seed")
    p.add_argument("--out", default=d(None), help="output file (CSV gets a .meta.json sidecar)")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    p.add_argument("--threads", type=int, default=d(1))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="embedsolve", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    _add_globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("graph", parents=[common], help="moments of a graph matrix")
    sp.add_argument("graph", help="JSON or edge-list file, or builtin:c60 / builtin:complete:M")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("sample", parents=[common], help="Monte Carlo symbol distribution")
    sp.add_argument("--graph")
    sp.add_argument("--projection", type=int, nargs=2, metavar=("M", "N"))
    sp.add_argument("--singular-values")
    sp.add_argument("--n", type=int)
    sp.add_argument("--count", type=int, default=1_000_000)
    sp.add_argument("--bins", type=int, default=200)
    sp.add_argument("--full", action="store_true", help="draw the kernel components explicitly")
    sp.add_argument("--fig1", action="store_true", help="add the Gauss overlay column")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("project", parents=[common], help="orthogonal projection laws and bounds")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--count", type=int, default=100_000)
    sp.add_argument("--bins", type=int, default=200)
    sp.add_argument("--points", type=int, default=200)
    fig = sp.add_mutually_exclusive_group()
    fig.add_argument("--fig2", action="store_true", help="empirical vs beta CDF (default)")
    fig.add_argument("--fig3", action="store_true", help="tail probabilities vs concentration bounds")
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("rates", parents=[common], help="optimal reduction factors M_k")
    sp.add_argument("--family", choices=("normal", "beta"), default="normal")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--moments", type=float, nargs=2, metavar=("V", "Z"), help="fit a rescaled beta law")
    sp.add_argument("--k", type=int, default=12)
    sp.add_argument("--table1", action="store_true", help="three normal columns sigma = 1/16, 1/32, 1/64")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("expsum", parents=[common], help="exponential-sum approximation of 1/r")
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--k1", type=int, default=-2)
    sp.add_argument("--k2", type=int, default=50)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--r-lo", type=float, default=1.0)
    sp.add_argument("--r-hi", type=float, default=1e18)
    sp.add_argument("--points", type=int, default=10_000)
    sp.add_argument("--fig4", action="store_true", help="window phi(s ln 10)")
    sp.add_argument("--s-lo", type=float, default=-1.0)
    sp.add_argument("--s-hi", type=float, default=19.0)
    sp.set_defaults(func=cmd_expsum)

    sp = sub.add_parser("iterate", parents=[common], help="simulate the iteration in frequency space")
    sp.add_argument("graph")
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--schedule", choices=("optimal", "chebyshev", "basic"), default="optimal")
    sp.add_argument("--sigma", type=float, help="default: sqrt of the symbol variance")
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--theta", type=float, help="default: 1/||T^t||^2")
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--K", type=int, default=6)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--directions", type=int, default=100_000)
    sp.add_argument("--prefactor-count", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_iterate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        args.func(args)
    except (GraphFormatError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleMomentsError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
