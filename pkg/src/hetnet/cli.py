"""Command-line front end. Every command writes CSV with a '#'-prefixed
run manifest; thresholds are given in dB and converted once here."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coverage import db_to_linear, ps_asymptotic, ps_asymptotic_tier, ps_exact, ps_exact_tiers
from .metrics import ModeError, monotonicity_signs, ps_max
from .model import ConfigError, NetworkModel, coefficient_vectors, to_config, validate
from .montecarlo import SimConfig, simulate_ps
from .optimize import InfeasibleError, grid_search_oracle, optimize_general, optimize_usdma
from .specfun import ConvergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGED = 4


class UsageError(Exception):
    pass


def load_config(path: str | Path) -> tuple[NetworkModel, str]:
    """Parse and validate a JSON network file; returns the model and a hash of its resolved form."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        model = validate(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    resolved = json.dumps(to_config(model), sort_keys=True)
    return model, hashlib.sha256(resolved.encode()).hexdigest()


def sweep(start: float, stop: float, step: float, name: str) -> list[float]:
    if not step > 0:
        raise UsageError(f"{name} step must be positive")
    if start > stop:
        raise UsageError(f"empty {name} sweep: from ({start}) exceeds to ({stop})")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return str(x)


def write_csv(out: str | None, command: str, config_hash: str, seeds, header, rows, started: float) -> None:
    body = io.StringIO()
    w = csv.writer(body, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    manifest = [
        f"# command: {command}",
        f"# config_sha256: {config_hash}",
        f"# seeds: {' '.join(str(s) for s in seeds) if seeds else 'none'}",
        f"# version: hetnet {__version__}",
        f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}",
        f"# duration_s: {time.perf_counter() - started:.3f}",
        f"# outputs: {out or '-'}",
    ]
    text = "\n".join(manifest) + "\n" + body.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_ps(args) -> int:
    started = time.perf_counter()
    model, h = load_config(args.config)
    grid = sweep(args.gamma_db_from, args.gamma_db_to, args.gamma_db_step, "gamma-db")
    K = model.K
    header = ["gamma_db"]
    if args.mode in ("exact", "both"):
        header.append("ps_exact")
    if args.mode in ("asymptotic", "both"):
        header.append("ps_asym")
    if args.mode in ("exact", "both"):
        header += [f"ps_exact_tier_{k + 1}" for k in range(K)]
    if args.mode in ("asymptotic", "both"):
        header += [f"ps_asym_tier_{k + 1}" for k in range(K)]

    rows = []
    for db in grid:
        g = db_to_linear(db)
        row, tail = [db], []
        if args.mode in ("exact", "both"):
            row.append(ps_exact(model, g))
            tail += list(ps_exact_tiers(model, g))
        if args.mode in ("asymptotic", "both"):
            row.append(ps_asymptotic(model, g))
            tail += [ps_asymptotic_tier(model, k, g) for k in range(K)]
        rows.append(row + tail)
    write_csv(args.output, "ps", h, [], header, rows, started)
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    started = time.perf_counter()
    model, h = load_config(args.config)
    thetas = sweep(args.theta_from, args.theta_to, args.theta_step, "theta")
    if any(not 0 <= t <= 1 for t in thetas):
        raise UsageError("theta values must lie in [0, 1]")
    if args.method == "usdma" and not model.is_usdma():
        raise ConfigError(f"{args.config}: method 'usdma' requires an unbiased U-SDMA network")
    g = db_to_linear(args.gamma_db)
    K = model.K
    header = ["theta", "feasible", "ase_km2", "ase_m2", "ps_achieved"]
    header += [f"lambda_{k + 1}" for k in range(K)] + ["restarts", "converged", "ps_exact"]

    rows, any_feasible, all_converged = [], False, True
    for th in thetas:
        try:
            if args.method == "usdma":
                res = optimize_usdma(model, th, g)
                res.ps_exact = res.ps
            elif args.method == "general":
                res = optimize_general(model, th, g, restarts=args.restarts, epsilon=args.epsilon,
                                       max_iters=args.max_iters, seed=args.seed)
            else:
                res = grid_search_oracle(model, th, g, args.resolution)
                if res.feasible:
                    res.ps_exact = ps_exact(model.with_densities(res.lambda_opt), g)
        except InfeasibleError:
            rows.append([th, False, math.nan, math.nan, math.nan] + [math.nan] * K + [0, True, math.nan])
            continue
        lam = res.lambda_opt if res.feasible else np.full(K, math.nan)
        any_feasible |= res.feasible
        all_converged &= res.converged
        rows.append(
            [th, res.feasible, res.ase if res.feasible else math.nan, res.ase_m2 if res.feasible else math.nan,
             res.ps if res.feasible else math.nan, *lam, res.restarts, res.converged,
             math.nan if res.ps_exact is None else res.ps_exact]
        )
    seeds = [args.seed] if args.method == "general" else []
    write_csv(args.output, f"tradeoff --method {args.method}", h, seeds, header, rows, started)
    if not any_feasible:
        return EXIT_INFEASIBLE
    if not all_converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    model, h = load_config(args.config)
    if args.trials < 100:
        raise UsageError(f"--trials must be at least 100 (got {args.trials}); standard errors are meaningless below that")
    gdb = list(args.gamma_db)
    sim = SimConfig(args.trials, args.seed, args.radius, tuple(db_to_linear(x) for x in gdb))
    rep = simulate_ps(model, sim)
    K = model.K
    header = ["gamma_db", "ps_hat", "stderr"]
    header += [f"assoc_freq_tier_{k + 1}" for k in range(K)]
    header += [f"ps_hat_tier_{k + 1}" for k in range(K)]
    header += ["trials", "seed", "radius_m"]
    rows = []
    for i, db in enumerate(gdb):
        rows.append([db, rep.ps_hat[i], rep.stderr[i], *rep.association_freq, *rep.tier_success[:, i],
                     rep.trials_used, rep.seed, rep.region_radius])
    write_csv(args.output, "simulate", h, [args.seed], header, rows, started)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    started = time.perf_counter()
    model, h = load_config(args.config)
    g = db_to_linear(args.gamma_db)
    cv = coefficient_vectors(model)
    ratio = cv.ratio
    deployed = model.with_densities(model.lambda_max)
    signs = monotonicity_signs(deployed)
    best = ps_max(model, g, "asymptotic")
    try:
        exact = ps_max(model, g, "exact")
    except ModeError:
        exact = None

    out = sys.stdout
    print(f"tiers: {model.K}   alpha: {model.alpha}   threshold: {args.gamma_db} dB", file=out)
    for k in range(model.K):
        print(f"  tier {k + 1}: c/d = {ratio[k]:.6f}   sign of d p_s / d lambda at lambda_max = {signs[k]:d}", file=out)
    if np.allclose(ratio, ratio[0], rtol=1e-12, atol=0):
        print("invariance: p_s independent of all densities", file=out)
    tied = ", ".join(str(i + 1) for i in best.tied)
    print(f"max tier (asymptotic): {best.tier + 1}  (tied: {tied})   p_s^max ~ {best.value:.6f}", file=out)
    if exact is not None:
        print(f"max tier (exact, U-SDMA): {exact.tier + 1}   p_s^max = {exact.value:.6f}", file=out)
    ceiling = exact.value if exact is not None else best.value
    print(f"feasibility ceiling for theta: {ceiling:.6f}", file=out)

    if args.output:
        header = ["tier", "c_over_d", "sign_at_lambda_max", "is_max_asymptotic", "is_max_exact", "ps_max_asymptotic", "ps_max_exact"]
        rows = [
            [k + 1, ratio[k], signs[k], k == best.tier, exact is not None and k == exact.tier, best.value,
             math.nan if exact is None else exact.value]
            for k in range(model.K)
        ]
        write_csv(args.output, "diagnose", h, [], header, rows, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetnet", description=__doc__)
    p.add_argument("--version", action="version", version=f"hetnet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ps", help="success probability sweep over SIR thresholds")
    s.add_argument("config")
    s.add_argument("--gamma-db-from", type=float, default=-10.0)
    s.add_argument("--gamma-db-to", type=float, default=20.0)
    s.add_argument("--gamma-db-step", type=float, default=1.0)
    s.add_argument("--mode", choices=("exact", "asymptotic", "both"), default="both")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_ps)

    s = sub.add_parser("tradeoff", help="maximum ASE under a reliability floor, swept over theta")
    s.add_argument("config")
    s.add_argument("--theta-from", type=float, default=0.0)
    s.add_argument("--theta-to", type=float, default=1.0)
    s.add_argument("--theta-step", type=float, default=0.05)
    s.add_argument("--gamma-db", type=float, default=0.0)
    s.add_argument("--method", choices=("usdma", "general", "grid"), default="general")
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--resolution", type=int, default=100)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_tradeoff)

    s = sub.add_parser("simulate", help="Monte Carlo success probability")
    s.add_argument("config")
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gamma-db", type=float, nargs="+", default=[0.0])
    s.add_argument("--radius", type=float, default=0.0, help="disc radius in meters (0 = automatic)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("diagnose", help="density monotonicity and maximum reliability")
    s.add_argument("config")
    s.add_argument("--gamma-db", type=float, default=0.0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
