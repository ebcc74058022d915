"""Command-line entry point: ``canform <command> [options]``.

Exit codes: 0 success, 1 usage/I-O/parse error, 2 canonicalization failure,
3 table mismatch, 4 spectral check failed, 5 simulation did not converge,
6 technical condition T2 violated.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import algorithms as algs
from .canonical import (
    CanonicalParams,
    CanonicalizationError,
    T1Violated,
    T2Violated,
    GradientsNotBalanced,
    canonicalize,
    check_technical_conditions,
    construct_fixed_point,
)
from .graph import InvalidLaplacian, InvalidSpec, LaplacianGraph, TOPOLOGIES, build_laplacian
from .ratpoly import format_rational, parse_rational
from .realization import RealizationFormatError, StructuredRealization, load_realization, transfer_function
from .sim import convergence_metrics, logcosh_objective, quadratic_objective, run_canonical
from .spectral import format_reports, lemma1_check

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CANON = 2
EXIT_TABLE = 3
EXIT_SPECTRAL = 4
EXIT_CONVERGENCE = 5
EXIT_T2 = 6

DEFAULT_ALPHA = "1/10"
SEED_ENV = "CANFORM_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- config ------------------------------------------------------------------

@dataclass
class RunConfig:
    algorithm: Optional[str] = None
    realization: Optional[str] = None
    params: dict = field(default_factory=dict)
    graph: dict = field(default_factory=dict)
    objective: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)


def _env_seed() -> Optional[int]:
    v = os.environ.get(SEED_ENV)
    if v is None or v.strip() == "":
        return None
    try:
        return int(v)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {v!r}")


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise UsageError(f"cannot parse {path}: {exc}")
    sec = {name: dict(cp[name]) if cp.has_section(name) else {}
           for name in ("params", "graph", "objective", "simulation", "output", "tolerances")}
    params = sec["params"]
    alg = params.pop("algorithm", None)
    real = params.pop("realization", None)
    if (alg is None) == (real is None):
        raise UsageError("[params] needs exactly one of 'algorithm' or 'realization'")
    if real is not None:
        rp = Path(real)
        if not rp.is_absolute():
            rp = path.parent / rp
        if not rp.is_file():
            raise UsageError(f"realization file not found: {rp}")
        real = str(rp)
    seed = _env_seed()
    if seed is not None:
        sec["graph"]["seed"] = str(seed)
        sec["simulation"]["seed"] = str(seed)
    return RunConfig(alg, real, params, sec["graph"], sec["objective"], sec["simulation"],
                     sec["output"], sec["tolerances"])


def _floats(text: str) -> np.ndarray:
    """``"1 2 3"`` -> per-agent scalars; ``"1 2; 3 4"`` -> per-agent rows."""
    rows = [r for r in str(text).split(";") if r.strip()]
    vals = [[float(x) for x in r.replace(",", " ").split()] for r in rows]
    if len(vals) == 1:
        return np.array(vals[0])
    return np.array(vals)


def _parse_edges(text: str) -> list[tuple]:
    edges = []
    for line in str(text).replace(";", "\n").splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) not in (2, 3):
            raise UsageError(f"edge must be 'i j [weight]': {line!r}")
        w = parts[2] if len(parts) == 3 else "1"
        edges.append((int(parts[0]), int(parts[1]), w))
    return edges


def graph_from_dict(d: dict, mu_override=None) -> LaplacianGraph:
    topo = d.get("topology")
    if topo is None:
        raise UsageError("graph needs a topology")
    if topo not in TOPOLOGIES:
        raise UsageError(f"unknown topology {topo!r}; choose from {', '.join(TOPOLOGIES)}")
    mu = mu_override if mu_override is not None else d.get("mu", "1")
    mu = _rational_or_float(mu)
    edges = _parse_edges(d["edges"]) if d.get("edges") else None
    n = d.get("n")
    if n is None and edges:
        n = 1 + max(max(i, j) for i, j, _ in edges)
    if n is None:
        raise UsageError("graph needs n")
    prob = d.get("prob")
    seed = d.get("seed")
    return build_laplacian(topo, int(n), mu, prob=float(prob) if prob is not None else None,
                           seed=int(seed) if seed is not None else None, edges=edges)


def _rational_or_float(v):
    if isinstance(v, (Fraction, float, int)):
        return v
    try:
        return parse_rational(v)
    except ValueError:
        return float(v)


def objective_from_dict(d: dict, n: int):
    kind = d.get("type", "quadratic")
    if "b" not in d:
        raise UsageError("objective needs 'b'")
    b = _floats(d["b"])
    if b.shape[0] != n:
        raise UsageError(f"objective has {b.shape[0]} agents, graph has {n}")
    if kind == "quadratic":
        c = _floats(d["curvatures"]) if "curvatures" in d else 1.0
        return quadratic_objective(b, c)
    if kind == "logcosh":
        return logcosh_objective(b)
    raise UsageError(f"unknown objective type {kind!r}")


# -- shared input resolution --------------------------------------------------

def _realization_for(alg: Optional[str], file: Optional[str], alpha, beta, mu) -> StructuredRealization:
    if file is not None:
        if not Path(file).is_file():
            raise UsageError(f"realization file not found: {file}")
        return load_realization(file)
    return algs.get_algorithm(alg, alpha if alpha is not None else DEFAULT_ALPHA, beta, mu if mu is not None else 1)


def _resolve_input(token: str, alpha, beta, mu) -> StructuredRealization:
    if Path(token).is_file():
        return load_realization(token)
    if token in algs.REGISTRY:
        return _realization_for(token, None, alpha, beta, mu)
    raise UsageError(f"{token!r} is neither a realization file nor a known algorithm "
                     f"({', '.join(algs.ALGORITHM_NAMES)})")


def _params_from_args(args) -> CanonicalParams:
    if getattr(args, "params", None):
        vals = [v for v in args.params.replace(",", " ").split()]
        if len(vals) != 5:
            raise UsageError("--params needs alpha,zeta0,zeta1,zeta2,zeta3")
        return CanonicalParams(*vals)
    if args.alg is None and args.file is None:
        raise UsageError("give --alg, --file or --params")
    return canonicalize(_realization_for(args.alg, args.file, args.alpha, args.beta, None))


def _graph_from_args(args) -> LaplacianGraph:
    d = {"topology": args.graph, "n": args.n, "mu": args.mu or "1"}
    if args.prob is not None:
        d["prob"] = args.prob
    if args.seed is not None:
        d["seed"] = args.seed
    elif _env_seed() is not None:
        d["seed"] = _env_seed()
    if args.edges is not None:
        d["edges"] = args.edges
    return graph_from_dict(d)


# -- commands ----------------------------------------------------------------

def cmd_canonicalize(args) -> int:
    r = _realization_for(args.alg, args.file, args.alpha, args.beta, args.mu)
    tf = transfer_function(r)
    print(f"G(z, lam) = {tf}")
    try:
        p = canonicalize(r)
    except CanonicalizationError as exc:
        print(exc.kind.value)
        if exc.detail:
            print(exc.detail)
        return EXIT_CANON
    print(f"alpha = {format_rational(p.alpha)}")
    print(f"zeta = {p.zeta_str()}")
    return EXIT_OK


def cmd_compare(args) -> int:
    ra = _resolve_input(args.a, args.alpha, args.beta, args.mu)
    rb = _resolve_input(args.b, args.alpha, args.beta, args.mu)
    labels = []
    params = []
    for token, r in ((args.a, ra), (args.b, rb)):
        try:
            p = canonicalize(r)
            params.append(p)
            labels.append(f"{token}: alpha = {format_rational(p.alpha)}, zeta = {p.zeta_str()}")
        except CanonicalizationError as exc:
            params.append(None)
            labels.append(f"{token}: not canonicalizable ({exc.kind.value}); G = {transfer_function(r)}")
    for line in labels:
        print(line)
    if params[0] is not None and params[1] is not None:
        same = params[0] == params[1]
    else:
        same = transfer_function(ra) == transfer_function(rb)
    print("EQUIVALENT" if same else "DISTINCT")
    return EXIT_OK


def cmd_table(args, registry=None) -> int:
    if args.beta is None:
        print("warning: --beta not given; Jakovetic rows skipped", file=sys.stderr)
    try:
        rows = algs.reproduce_table1(args.alpha, args.beta, registry=registry)
    except CanonicalizationError as exc:
        print(f"canonicalization failed: {exc}")
        return EXIT_TABLE
    if args.format == "csv":
        print("algorithm,zeta0,zeta1,zeta2,zeta3,match")
        for r in rows:
            print(",".join([r.name] + [format_rational(z) for z in r.params.zetas] + [str(r.matches).lower()]))
    else:
        print(algs.format_table(rows))
    bad = [r for r in rows if not r.matches]
    for r in bad:
        got = ", ".join(format_rational(z) for z in r.params.zetas)
        want = ", ".join(format_rational(z) for z in r.expected)
        print(f"mismatch {r.name}: got ({got}), expected ({want})")
    return EXIT_TABLE if bad else EXIT_OK


def cmd_analyze(args) -> int:
    p = _params_from_args(args)
    g = _graph_from_args(args)
    res = lemma1_check(p, g, args.tol)
    print(format_reports(res.reports, args.format))
    if res.passed:
        print("verdict: pass")
        return EXIT_OK
    print("verdict: FAIL")
    for r in res.offending():
        print(f"offending lambda = {r.lam:.12g}: {r.classification.value} {r.detail}".rstrip())
    return EXIT_SPECTRAL


def _params_from_config(cfg: RunConfig) -> CanonicalParams:
    pr = dict(cfg.params)
    alpha = pr.get("alpha", DEFAULT_ALPHA)
    beta = pr.get("beta")
    if cfg.algorithm == "canonical":
        try:
            return CanonicalParams(alpha, pr["zeta0"], pr["zeta1"], pr["zeta2"], pr["zeta3"])
        except KeyError as exc:
            raise UsageError(f"algorithm = canonical needs key {exc}")
    if cfg.realization is not None:
        r = load_realization(cfg.realization)
    else:
        r = algs.get_algorithm(cfg.algorithm, alpha, beta, 1)
    p = canonicalize(r)
    over = {k: pr[k] for k in ("alpha", "zeta0", "zeta1", "zeta2", "zeta3")
            if k in pr and not (k == "alpha" and cfg.algorithm is not None)}
    if over:
        vals = dict(zip(("alpha", "zeta0", "zeta1", "zeta2", "zeta3"), p.as_tuple()))
        vals.update(over)
        p = CanonicalParams(**vals)
    return p


def _agent_init(spec, n, d, rng, what) -> np.ndarray:
    if spec is None or str(spec).strip() in ("", "0", "zeros"):
        return np.zeros((n, d))
    if str(spec).strip() == "random":
        return rng.standard_normal((n, d))
    a = _floats(spec)
    if a.ndim == 1 and d == 1 and a.shape[0] == n:
        return a[:, None]
    if a.ndim == 1 and a.shape[0] == d:
        return np.tile(a, (n, 1))
    if a.shape == (n, d):
        return a
    raise UsageError(f"{what} has shape {a.shape}, expected ({n}, {d})")


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    p = _params_from_config(cfg)
    g = graph_from_dict(cfg.graph)
    obj = objective_from_dict(cfg.objective, g.n)
    sim = cfg.simulation
    K = int(sim.get("K", 1000))
    seed = int(sim["seed"]) if "seed" in sim else 0
    rng = np.random.Generator(np.random.PCG64(seed))
    x0 = _agent_init(sim.get("x0"), g.n, obj.d, rng, "x0")
    w0 = _agent_init(sim.get("w0"), g.n, obj.d, rng, "w0")
    threshold = float(cfg.tolerances.get("threshold", sim.get("threshold", 1e-8)))

    report = check_technical_conditions(p, g, w0.sum(axis=0))
    with np.errstate(over="ignore", invalid="ignore"):
        traj = run_canonical(p, g, obj, x0, w0, K)
    out = args.output or cfg.output.get("trajectory")
    if out:
        traj.write_csv(out)
        print(f"trajectory written to {out}")
    print(f"alpha = {format_rational(p.alpha)}, zeta = {p.zeta_str()}")
    for line in report.details:
        print(line)
    print(f"iterations = {K}, communication rounds = {traj.comm_rounds}")
    y_last = traj.y[-1]
    with np.errstate(over="ignore", invalid="ignore"):
        cons = float(np.max(np.linalg.norm(y_last[:, None, :] - y_last[None, :, :], axis=2)))
    print(f"consensus residual = {cons:.6e}")
    if obj.known_minimizer is None:
        print("no known minimizer; metrics only")
        return EXIT_OK
    with np.errstate(over="ignore", invalid="ignore"):
        err = float(convergence_metrics(traj, obj.known_minimizer).error[-1])
    print(f"final error = {err:.6e} (threshold {threshold:g})")
    if np.isfinite(err) and err <= threshold:
        return EXIT_OK
    return EXIT_CONVERGENCE


def cmd_fixed_point(args) -> int:
    if args.config:
        cfg = load_run_config(args.config)
        p = _params_from_config(cfg)
        g = graph_from_dict(cfg.graph)
        obj = objective_from_dict(cfg.objective, g.n)
    else:
        p = _params_from_args(args)
        g = _graph_from_args(args)
        if args.b is None:
            raise UsageError("give --b (per-agent targets) or --config")
        d = {"b": args.b}
        if args.curvatures is not None:
            d["curvatures"] = args.curvatures
        obj = objective_from_dict(d, g.n)
    if obj.known_minimizer is None:
        raise UsageError("fixed-point needs an objective with a known minimizer")
    x_star = obj.known_minimizer
    grads = obj.grad_all(np.tile(x_star, (g.n, 1)))
    try:
        fp = construct_fixed_point(p, g, x_star, grads)
    except T2Violated as exc:
        print(f"T2Violated: {exc}")
        return EXIT_T2
    cols = ("x", "w", "v1", "v2", "y", "u")
    if args.format == "csv":
        print("i,coord," + ",".join(cols))
        for i in range(g.n):
            for c in range(obj.d):
                print(f"{i},{c}," + ",".join(format(float(getattr(fp, k)[i, c]), ".17g") for k in cols))
    else:
        print("agent  " + "  ".join(f"{k:>14}" for k in cols))
        for i in range(g.n):
            for c in range(obj.d):
                print(f"{i:>5}  " + "  ".join(f"{float(getattr(fp, k)[i, c]):>14.8g}" for k in cols))
    print(f"linear-system residual = {fp.residual:.3e}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_alg_opts(sp, with_file=True):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--alg", choices=algs.ALGORITHM_NAMES, help="registry algorithm name")
    if with_file:
        g.add_argument("--file", help="realization file ([realization] section)")
    sp.add_argument("--alpha", default=None, help=f"stepsize as p/q or integer (default {DEFAULT_ALPHA})")
    sp.add_argument("--beta", default=None, help="beta for the Jakovetic variants, p/q or integer")


def _add_graph_opts(sp):
    sp.add_argument("--graph", choices=TOPOLOGIES, default="ring", help="topology (default ring)")
    sp.add_argument("--n", type=int, default=5, help="number of agents (default 5)")
    sp.add_argument("--prob", type=float, default=None, help="edge probability for erdos_renyi")
    sp.add_argument("--seed", type=int, default=None, help=f"seed for erdos_renyi (env {SEED_ENV} if unset)")
    sp.add_argument("--mu", default=None, help="Laplacian scaling, L -> mu*L (default 1)")
    sp.add_argument("--edges", default=None, help="explicit edges 'i j w; i j w' for --graph edges")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="canform", description="Canonical form toolkit for first-order distributed optimization algorithms.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("canonicalize", help="reduced transfer function and canonical parameters")
    _add_alg_opts(sp)
    sp.add_argument("--mu", default=None, help="gossip scaling W = I - mu*L for registry algorithms")
    sp.set_defaults(func=cmd_canonicalize)

    sp = sub.add_parser("compare", help="decide whether two algorithms are equivalent")
    sp.add_argument("a", help="algorithm name or realization file")
    sp.add_argument("b", help="algorithm name or realization file")
    sp.add_argument("--alpha", default=None, help=f"stepsize for named algorithms (default {DEFAULT_ALPHA})")
    sp.add_argument("--beta", default=None, help="beta for the Jakovetic variants")
    sp.add_argument("--mu", default=None, help="gossip scaling W = I - mu*L for registry algorithms")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("table", help="reproduce the parameter table of the known algorithms")
    sp.add_argument("--alpha", default=DEFAULT_ALPHA, help=f"stepsize (default {DEFAULT_ALPHA})")
    sp.add_argument("--beta", default=None, help="beta for the Jakovetic rows; rows skipped when absent")
    sp.add_argument("--format", choices=("text", "csv"), default="text", help="output format")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("analyze", help="per-eigenvalue pole/zero check of the canonical transfer function")
    _add_alg_opts(sp)
    sp.add_argument("--params", default=None, help="explicit 'alpha,zeta0,zeta1,zeta2,zeta3'")
    _add_graph_opts(sp)
    sp.add_argument("--tol", type=float, default=1e-9, help="root tolerance (default 1e-9)")
    sp.add_argument("--format", choices=("text", "csv"), default="text", help="report format")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="run the canonical iteration from a config file")
    sp.add_argument("config", help="INI config with [params] [graph] [objective] [simulation] [output]")
    sp.add_argument("--output", default=None, help="trajectory CSV path (overrides [output] trajectory)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fixed-point", help="construct the optimal fixed point")
    _add_alg_opts(sp)
    sp.add_argument("--params", default=None, help="explicit 'alpha,zeta0,zeta1,zeta2,zeta3'")
    _add_graph_opts(sp)
    sp.add_argument("--b", default=None, help="quadratic targets, e.g. '1 2 3 4 5'")
    sp.add_argument("--curvatures", default=None, help="quadratic curvatures (default all 1)")
    sp.add_argument("--config", default=None, help="INI config instead of flags")
    sp.add_argument("--format", choices=("text", "csv"), default="text", help="output format")
    sp.set_defaults(func=cmd_fixed_point)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, RealizationFormatError, InvalidSpec, InvalidLaplacian,
            algs.UnknownAlgorithm, algs.ZeroStepsize, algs.MissingParameter,
            GradientsNotBalanced, T1Violated, OSError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, CanonicalizationError):
            print(exc.kind.value)
            return EXIT_CANON
        name = type(exc).__name__
        msg = exc.args[0] if exc.args else ""
        print(f"{name}: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
