"""Command-line front end: sampling runs, single geodesics, diagnostics, Physarum.

All outputs are file-based and fully determined by the flags plus the seed;
every command writes a manifest JSON that reconstructs the run.  Exit codes:
0 success, 2 configuration/file errors, 3 numerical aborts.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .collocation import CollocationConfig, NonContractionError
from .diagnostics import compare_walks, uniformity_report
from .physarum import PhysarumError, load_physarum_problem, physarum_solve
from .polytope import (CenteringError, InteriorError, PolytopeError,
                       analytic_center, load_polytope, make_point)
from .walk import (GeodesicExitError, SingularJacobiError, WalkConfig,
                   logdet_dexp_pair, propose_with_tangent, run_chain,
                   transition_log_density)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_samples_csv(path, samples, n: int):
    with open(path, "w") as fh:
        fh.write(",".join(f"x{i}" for i in range(n)) + "\n")
        for row in np.atleast_2d(samples):
            if row.size:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(command: str, args_echo: dict, outputs: list, wall_time: float) -> dict:
    return {
        "command": command,
        "config": args_echo,
        "outputs": outputs,
        "version": f"geowalk {__version__}",
        "wall_time_s": wall_time,
    }


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()])
    except ValueError as exc:
        raise PolytopeError(f"could not parse vector {text!r}") from exc


def _start_point(P, spec: str):
    if spec == "center":
        return analytic_center(P)
    try:
        with open(spec) as fh:
            data = json.load(fh)
        return make_point(P, np.array(data, dtype=float))
    except FileNotFoundError:
        return make_point(P, _parse_vector(spec))


def _walk_config(args, n: int) -> WalkConfig:
    coll = CollocationConfig(degree=args.degree, tol=args.ode_tol, p_norm=4)
    return WalkConfig(h=args.h, burnin=args.burnin, thin=args.thin,
                      collocation=coll)


def _run_one_chain(payload):
    """Worker for --chains: runs one chain from its derived seed."""
    (doc, start_spec, steps, h, burnin, thin, degree, ode_tol, seed) = payload
    P = load_polytope(doc)
    coll = CollocationConfig(degree=degree, tol=ode_tol, p_norm=4)
    cfg = WalkConfig(h=h, burnin=burnin, thin=thin, collocation=coll)
    start = _start_point(P, start_spec)
    rng = np.random.default_rng(seed)
    samples, stats, _ = run_chain(P, start, steps, cfg, rng, seed=seed)
    return samples, stats.to_dict()


def cmd_sample(args) -> int:
    try:
        P = load_polytope(args.polytope)
        start = _start_point(P, args.start)
        cfg = _walk_config(args, P.n)
    except (PolytopeError, CenteringError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    outputs = []
    try:
        if args.chains == 1:
            rng = np.random.default_rng(args.seed)
            samples, stats, _ = run_chain(P, start, args.steps, cfg, rng,
                                          seed=args.seed)
            write_samples_csv(args.out, samples, P.n)
            write_json(args.stats, stats.to_dict())
            outputs = [args.out, args.stats]
            if stats.zero_acceptance:
                print("warning: zero-acceptance chain (step size too large?)",
                      file=sys.stderr)
        else:
            with open(args.polytope) as fh:
                doc = json.load(fh)
            payloads = [(doc, args.start, args.steps, args.h, args.burnin,
                         args.thin, args.degree, args.ode_tol,
                         (args.seed or 0) + i) for i in range(args.chains)]
            with ProcessPoolExecutor(max_workers=min(args.chains, 8)) as pool:
                results = list(pool.map(_run_one_chain, payloads))
            for i, (samples, stats_dict) in enumerate(results):
                out_i = _suffixed(args.out, i)
                stats_i = _suffixed(args.stats, i)
                write_samples_csv(out_i, samples, P.n)
                write_json(stats_i, stats_dict)
                outputs += [out_i, stats_i]
    except (NonContractionError, GeodesicExitError, SingularJacobiError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    manifest = _manifest("sample", {
        "polytope": args.polytope, "steps": args.steps, "h": args.h,
        "seed": args.seed, "burnin": args.burnin, "thin": args.thin,
        "start": args.start, "chains": args.chains, "degree": args.degree,
        "ode_tol": args.ode_tol, "out": args.out, "stats": args.stats,
    }, outputs, time.perf_counter() - t0)
    write_json(args.manifest or args.out + ".manifest.json", manifest)
    return EXIT_OK


def _suffixed(path: str, i: int) -> str:
    if "." in path.rsplit("/", 1)[-1]:
        stem, ext = path.rsplit(".", 1)
        return f"{stem}_chain{i}.{ext}"
    return f"{path}_chain{i}"


def cmd_geodesic(args) -> int:
    try:
        P = load_polytope(args.polytope)
        x = _parse_vector(args.x)
        v = _parse_vector(args.v)
        p = make_point(P, x)
    except (PolytopeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    cfg = WalkConfig(h=args.h, collocation=CollocationConfig(
        degree=args.degree, tol=args.ode_tol, p_norm=4))
    step = propose_with_tangent(p, cfg, v)
    if step.fail_reason is not None:
        print(json.dumps({"error": "proposal failed",
                          "reason": step.fail_reason}, indent=2))
        return EXIT_NUMERIC
    try:
        step.logdet_fwd, step.logdet_rev = logdet_dexp_pair(step)
    except (SingularJacobiError, NonContractionError) as exc:
        print(json.dumps({"error": "jacobi solve failed", "reason": str(exc)},
                         indent=2))
        return EXIT_NUMERIC
    log_fwd = transition_log_density(step.start, step.v_x, step.end,
                                     step.logdet_fwd, step.h)
    log_rev = transition_log_density(step.end, step.v_y, step.start,
                                     step.logdet_rev, step.h)
    report = {
        "endpoint": [float(t) for t in step.end.x],
        "reverse_velocity": [float(t) for t in step.v_y],
        "logdet_dexp_fwd": step.logdet_fwd,
        "logdet_dexp_rev": step.logdet_rev,
        "v_gamma": step.v_gamma,
        "log_density_fwd": log_fwd,
        "log_density_rev": log_rev,
        "log_ratio": log_rev - log_fwd,
        "accept_probability": min(1.0, float(np.exp(log_rev - log_fwd))),
    }
    print(json.dumps(report, indent=2))
    if args.out:
        write_json(args.out, report)
    return EXIT_OK


def cmd_physarum(args) -> int:
    try:
        prob = load_physarum_problem(args.problem)
    except (PhysarumError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        traj = physarum_solve(prob, args.T, eps=args.eps)
    except PhysarumError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    with open(args.out, "w") as fh:
        cols = ",".join(f"x{i}" for i in range(prob.n))
        fh.write(f"t,{cols},objective,feasibility\n")
        for t, x, obj, feas in zip(traj.times, traj.states, traj.objective,
                                   traj.feasibility):
            row = ",".join(_fmt(v) for v in x)
            fh.write(f"{_fmt(t)},{row},{_fmt(obj)},{_fmt(feas)}\n")
    for w in traj.warnings:
        print(f"warning: {w}", file=sys.stderr)
    manifest = _manifest("physarum", {
        "problem": args.problem, "T": args.T, "eps": args.eps, "out": args.out,
    }, [args.out], time.perf_counter() - t0)
    write_json(args.manifest or args.out + ".manifest.json", manifest)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    try:
        P = load_polytope(args.polytope)
    except (PolytopeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    rng = np.random.default_rng(args.seed)
    outputs = []
    try:
        if args.samples:
            try:
                data = np.loadtxt(args.samples, delimiter=",", skiprows=1, ndmin=2)
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            report = uniformity_report(data, P, rng)
            write_json(args.out, report.to_dict())
            outputs.append(args.out)
        elif args.compare_h:
            rows = compare_walks(P, args.compare_h, args.steps, rng)
            with open(args.out, "w") as fh:
                fh.write("h,dikin_radius,geo_accept,geo_iact,dikin_accept,dikin_iact\n")
                for row in rows:
                    d = row.to_dict()
                    fh.write(",".join(_fmt(d[k]) for k in
                                      ("h", "dikin_radius", "geo_accept",
                                       "geo_iact", "dikin_accept", "dikin_iact"))
                             + "\n")
            outputs.append(args.out)
        else:
            print("error: give --samples FILE or --compare-h H1,H2,...",
                  file=sys.stderr)
            return EXIT_CONFIG
    except (ValueError, PolytopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = _manifest("diagnose", {
        "polytope": args.polytope, "samples": args.samples,
        "compare_h": args.compare_h, "steps": args.steps, "seed": args.seed,
        "out": args.out,
    }, outputs, time.perf_counter() - t0)
    write_json(args.manifest or args.out + ".manifest.json", manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geowalk",
                                 description="Geodesic-walk polytope sampler")
    ap.add_argument("--version", action="version",
                    version=f"geowalk {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="run a sampling chain")
    sp.add_argument("--polytope", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="samples.csv")
    sp.add_argument("--stats", default="stats.json")
    sp.add_argument("--manifest", default=None)
    sp.add_argument("--burnin", type=int, default=None)
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--start", default="center",
                    help="'center', a JSON file with a point, or a CSV vector")
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--degree", type=int, default=8)
    sp.add_argument("--ode-tol", type=float, default=1e-8)
    sp.set_defaults(func=cmd_sample)

    gp = sub.add_parser("geodesic", help="solve and report a single geodesic step")
    gp.add_argument("--polytope", required=True)
    gp.add_argument("--x", required=True, help="start point, comma separated")
    gp.add_argument("--v", required=True,
                    help="unscaled tangent v_x, comma separated")
    gp.add_argument("--h", type=float, required=True)
    gp.add_argument("--degree", type=int, default=8)
    gp.add_argument("--ode-tol", type=float, default=1e-10)
    gp.add_argument("--out", default=None)
    gp.set_defaults(func=cmd_geodesic)

    pp = sub.add_parser("physarum", help="run the Physarum LP dynamics")
    pp.add_argument("--problem", required=True)
    pp.add_argument("--T", type=float, default=20.0)
    pp.add_argument("--eps", type=float, default=1e-8)
    pp.add_argument("--out", default="physarum.csv")
    pp.add_argument("--manifest", default=None)
    pp.set_defaults(func=cmd_physarum)

    dp = sub.add_parser("diagnose", help="uniformity report or walk comparison")
    dp.add_argument("--polytope", required=True)
    dp.add_argument("--samples", default=None)
    dp.add_argument("--compare-h", type=lambda s: [float(t) for t in s.split(",")],
                    default=None)
    dp.add_argument("--steps", type=int, default=2000)
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--out", default="diagnose.json")
    dp.add_argument("--manifest", default=None)
    dp.set_defaults(func=cmd_diagnose)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
