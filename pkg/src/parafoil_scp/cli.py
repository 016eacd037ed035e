"""Command-line surface: plan, fly, montecarlo, wind and solve-socp.

Every command is deterministic given (config, seed).  Exit codes:
0 success, 2 configuration error, 3 output collision, 4 planner/solver
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from pydantic import ValidationError

from . import config as cfgmod
from .control_sim import fly
from .montecarlo import run_campaign, stats_trace_csv, summarize, to_csv
from .planner import plan
from .socp import SocpSolver, SolveStatus
from .transcription import ConvexSubproblem
from .wind import WindProfile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COLLISION = 3
EXIT_SOLVER = 4


def _load(path: str):
    try:
        return cfgmod.load_config(path), None
    except FileNotFoundError as exc:
        return None, {"error": "config_not_found", "detail": str(exc)}
    except ValidationError as exc:
        detail = [
            {"key": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return None, {"error": "config_invalid", "detail": detail}
    except (ValueError, json.JSONDecodeError) as exc:
        return None, {"error": "config_invalid", "detail": str(exc)}


def _fail(payload: dict, code: int) -> int:
    print(json.dumps(payload, indent=1, sort_keys=True), file=sys.stderr)
    return code


def _prepare_dir(path: str, force: bool):
    out = Path(path)
    if out.exists() and any(out.iterdir()) and not force:
        return None
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True), encoding="utf-8")


# -- commands ---------------------------------------------------------------


def cmd_plan(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail(err, EXIT_CONFIG)
    out = _prepare_dir(args.out, args.force)
    if out is None:
        return _fail({"error": "output_collision", "detail": args.out}, EXIT_COLLISION)
    scenario = cfgmod.build_scenario(cfg, seed=args.seed)
    if args.max_iter is not None:
        scenario = dataclasses.replace(
            scenario,
            weights=dataclasses.replace(scenario.weights, max_iter=args.max_iter),
        )
    iterates: list = []
    try:
        reference, diag = plan(scenario, keep_iterates=iterates)
    except Exception as exc:
        return _fail({"error": "planner_failure", "detail": str(exc)}, EXIT_SOLVER)
    if diag.solver_failure and not diag.cost_history:
        return _fail({"error": "solver_failure", "detail": "no accepted iterate"},
                     EXIT_SOLVER)
    _write_json(out / "trajectory.json", reference.to_records())
    _write_json(out / "diagnostics.json", diag.to_dict())
    snaps = out / "iterates"
    snaps.mkdir(exist_ok=True)
    for i, it in enumerate(iterates):
        _write_json(
            snaps / f"iterate_{i:03d}.json",
            {
                "t": it.times.tolist(),
                "x": it.x.tolist(),
                "u": it.u.tolist(),
            },
        )
    print(f"converged={diag.converged} iterations={diag.iterations} "
          f"miss_m={diag.final_miss:.6g}")
    return EXIT_OK


def cmd_fly(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail(err, EXIT_CONFIG)
    out = _prepare_dir(args.out, args.force)
    if out is None:
        return _fail({"error": "output_collision", "detail": args.out}, EXIT_COLLISION)
    scenario = cfgmod.build_scenario(cfg, seed=args.seed)
    truth = cfgmod.build_truth(cfg, seed=args.seed)
    gains = cfgmod.build_gains(cfg)
    threshold = (
        args.replan_threshold
        if args.replan_threshold is not None
        else cfg.campaign.replan_threshold
    )
    if threshold <= 0:
        threshold = math.inf
    try:
        record, log = fly(scenario, gains, truth, replan_threshold=threshold)
    except Exception as exc:
        return _fail({"error": "planner_failure", "detail": str(exc)}, EXIT_SOLVER)
    payload = record.to_dict()
    payload["seed"] = args.seed
    payload["replanning_enabled"] = math.isfinite(threshold)
    payload["replan_threshold_m"] = threshold if math.isfinite(threshold) else None
    _write_json(out / "landing.json", payload)
    _write_json(out / "log.json", log)
    print(f"status={record.status} miss_m={record.miss_distance:.6g} "
          f"replans={record.replans}")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail(err, EXIT_CONFIG)
    out = _prepare_dir(args.out, args.force)
    if out is None:
        return _fail({"error": "output_collision", "detail": args.out}, EXIT_COLLISION)
    campaign = cfgmod.build_campaign(cfg)
    if args.runs is not None:
        campaign = dataclasses.replace(campaign, runs=args.runs)
    if args.seed is not None:
        campaign = dataclasses.replace(campaign, base_seed=args.seed)
    if args.replan_threshold is not None:
        threshold = args.replan_threshold if args.replan_threshold > 0 else math.inf
        campaign = dataclasses.replace(campaign, replan_threshold=threshold)
    results, trace = run_campaign(campaign)
    (out / "campaign.csv").write_text(to_csv(results), encoding="utf-8")
    (out / "running_stats.csv").write_text(stats_trace_csv(trace), encoding="utf-8")
    summary = summarize(results)
    _write_json(out / "summary.json", summary)
    frac_ok = summary["landed"] / summary["runs"]
    print(f"runs={summary['runs']} landed={summary['landed']} "
          f"mean_miss_m={summary.get('miss_m', {}).get('mean', math.nan):.6g}")
    return EXIT_OK if frac_ok >= 0.95 else EXIT_SOLVER


def cmd_wind(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail(err, EXIT_CONFIG)
    n = args.runs if args.runs is not None else 1
    base = args.seed if args.seed is not None else 0
    if n == 1:
        profile = cfgmod.build_wind_profile(cfg, seed=base if args.seed is not None
                                            else None)
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        target = Path(args.out)
        if target.exists() and not args.force:
            return _fail({"error": "output_collision", "detail": args.out},
                         EXIT_COLLISION)
        target.write_text(profile.to_csv(), encoding="utf-8")
    else:
        out = _prepare_dir(args.out, args.force)
        if out is None:
            return _fail({"error": "output_collision", "detail": args.out},
                         EXIT_COLLISION)
        for i in range(n):
            profile = cfgmod.build_wind_profile(cfg, seed=base + i)
            (out / f"wind_{i:03d}.csv").write_text(profile.to_csv(),
                                                   encoding="utf-8")
    print(f"profiles={n}")
    return EXIT_OK


def cmd_solve_socp(args) -> int:
    try:
        text = Path(args.problem).read_text(encoding="utf-8")
        problem = ConvexSubproblem.from_triplets(text)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        return _fail({"error": "problem_invalid", "detail": str(exc)}, EXIT_CONFIG)
    solver = SocpSolver()
    sol = solver.solve(problem)
    print(f"status={sol.status.value} objective={sol.objective!r} "
          f"iterations={sol.iterations}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        _write_json(
            Path(args.out),
            {
                "status": sol.status.value,
                "objective": sol.objective,
                "iterations": sol.iterations,
                "primal": sol.primal.tolist(),
            },
        )
    return EXIT_OK if sol.status == SolveStatus.OPTIMAL else EXIT_SOLVER


# -- argument parsing -------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parafoil-scp",
        description="Parafoil precision-landing guidance toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario JSON path")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")

    p_plan = sub.add_parser("plan", help="compute a reference trajectory")
    common(p_plan)
    p_plan.add_argument("--max-iter", type=int, default=None)
    p_plan.set_defaults(func=cmd_plan)

    p_fly = sub.add_parser("fly", help="closed-loop flight to touchdown")
    common(p_fly)
    p_fly.add_argument("--replan-threshold", type=float, default=None,
                       help="cross-track metres; <= 0 disables replanning")
    p_fly.set_defaults(func=cmd_fly)

    p_mc = sub.add_parser("montecarlo", help="dispersion campaign")
    common(p_mc)
    p_mc.add_argument("--runs", type=int, default=None)
    p_mc.add_argument("--replan-threshold", type=float, default=None)
    p_mc.set_defaults(func=cmd_montecarlo)

    p_wind = sub.add_parser("wind", help="emit wind profile CSVs")
    common(p_wind)
    p_wind.add_argument("--runs", type=int, default=None,
                        help="number of profiles (seeds seed..seed+n-1)")
    p_wind.set_defaults(func=cmd_wind)

    p_solve = sub.add_parser("solve-socp", help="solve a conic problem file")
    p_solve.add_argument("problem", help="socp-triplets text file")
    p_solve.add_argument("--out", default=None, help="solution JSON path")
    p_solve.set_defaults(func=cmd_solve_socp)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
