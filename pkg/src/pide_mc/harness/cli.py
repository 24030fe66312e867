"""``pide-mc`` command line: solve, sweep, reference."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..problems import BUILTIN_PROBLEMS, ProblemSpec, make_problem
from ..solver import SolverConfig, final_snapshot
from ..sparse_grid import ExteriorPolicy
from .config import load_config_file, merge, parse_values
from .errors import l2_error
from .io import emit_csv, git_describe, write_manifest, write_snapshot
from .reference import load_reference, problem_echo, reference_solution
from .sweep import SweepAxis, run_sweep

__all__ = ["main", "build_parser", "resolve"]

LONG_DIM = 20  # runs above this dimension need --long

log = logging.getLogger("pide_mc")


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("problem")
    g.add_argument("--config", help="JSON or YAML file; flags override its values")
    g.add_argument("--problem", choices=BUILTIN_PROBLEMS)
    g.add_argument("--dim", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--long", action="store_const", const=True,
                   help=f"allow dimensions above {LONG_DIM} (long-running)")
    s = p.add_argument_group("solver")
    s.add_argument("--dt", type=float)
    s.add_argument("--steps", type=int, help="number of steps; with --dt sets T = dt * steps")
    s.add_argument("--paths", type=int)
    s.add_argument("--level", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--max-jumps", dest="max_jumps", type=int)
    s.add_argument("--exterior", choices=[e.value for e in ExteriorPolicy])
    s.add_argument("--workers", type=int, help="threads per solve")
    o = p.add_argument_group("output")
    o.add_argument("--out", help="output directory")
    o.add_argument("--n-eval", dest="n_eval", type=int)
    o.add_argument("--eval-seed", dest="eval_seed", type=int)
    o.add_argument("--reference", help="reference run directory (for problems without an exact solution)")
    o.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pide-mc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("solve", help="one solve, error report and final snapshot"))
    sw = sub.add_parser("sweep", help="convergence sweep over dt or path count")
    _add_common(sw)
    sw.add_argument("--axis", choices=[a.value for a in SweepAxis])
    sw.add_argument("--values", type=parse_values, help="comma-separated, e.g. 2^-3,2^-4,2^-5")
    sw.add_argument("--replicates", type=int)
    sw.add_argument("--jobs", type=int, help="concurrent solves")
    _add_common(sub.add_parser("reference", help="fine solve persisted as an error baseline"))
    return parser


def resolve(args: argparse.Namespace) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    file_values = load_config_file(args.config) if args.config else None
    return merge(file_values, flags)


def build_problem(cfg: dict) -> ProblemSpec:
    T = cfg["T"]
    if cfg["steps"] is not None:
        T = cfg["dt"] * cfg["steps"]
    problem = make_problem(cfg["problem"], d=cfg["dim"], alpha=cfg["alpha"],
                           delta=cfg["delta"], T=T)
    fam = cfg.get("family")
    if fam is not None and (problem.kernel is None or problem.kernel.family.value != fam):
        raise ValueError(f"problem {problem.name!r} does not use a {fam!r} kernel")
    if cfg["box"] is not None:
        problem = replace(problem, box=np.asarray(cfg["box"], dtype=float))
    if problem.d > LONG_DIM and not cfg["long"]:
        raise ValueError(f"d={problem.d} exceeds {LONG_DIM}; pass --long to run it")
    return problem


def build_config(problem: ProblemSpec, cfg: dict) -> SolverConfig:
    return SolverConfig.for_horizon(problem.T, cfg["dt"], m_paths=cfg["paths"],
                                    grid_level=cfg["level"], max_jumps=cfg["max_jumps"],
                                    exterior_policy=cfg["exterior"], master_seed=cfg["seed"],
                                    n_workers=cfg["workers"])


def _reference_fn(problem: ProblemSpec, cfg: dict):
    if cfg["reference"] is not None:
        snap, manifest = load_reference(cfg["reference"], cfg["exterior"])
        if manifest.get("problem") != problem.name or manifest.get("d") != problem.d:
            raise ValueError(f"reference {cfg['reference']} is for {manifest.get('problem')} "
                             f"d={manifest.get('d')}, not {problem.name} d={problem.d}")
        return snap
    if problem.exact is not None:
        T = problem.T
        return lambda X: problem.exact(T, X)
    return None


def _progress(config: SolverConfig):
    start = time.perf_counter()

    def report(snap):
        log.info("step %d/%d  t=%.6g  elapsed %.1fs", snap.step_index, config.n_steps,
                 snap.time, time.perf_counter() - start)
    return report


def cmd_solve(cfg: dict) -> int:
    problem = build_problem(cfg)
    config = build_config(problem, cfg)
    out = Path(cfg["out"])
    snap = final_snapshot(problem, config, _progress(config))
    design = snap.interpolant.design
    write_snapshot(out / "solution.bin", problem.d, design.level, design.points, snap.node_values)
    entries = problem_echo(problem)
    entries.update({"config": config.to_dict(), "step_index": snap.step_index,
                    "time": snap.time, "git": git_describe()})
    write_manifest(out / "manifest.txt", entries)
    ref = _reference_fn(problem, cfg)
    if ref is None:
        print(f"solved {problem.name} d={problem.d}; no exact solution or --reference, "
              f"snapshot written to {out}")
        return 0
    echo = {"problem": problem.name, "d": problem.d, "dt": config.dt, "n_steps": config.n_steps,
            "m_paths": config.m_paths, "grid_level": config.grid_level, "seed": config.master_seed}
    report = l2_error(problem, snap, ref, n_eval=cfg["n_eval"], eval_seed=cfg["eval_seed"],
                      config_echo=echo)
    emit_csv(report, out / "errors.csv")
    print(f"l2_error = {report.l2_error:.6e} (+/- {report.std_error:.1e} quadrature)")
    return 0


def cmd_sweep(cfg: dict) -> int:
    if not cfg["values"]:
        raise ValueError("--values is required for a sweep")
    problem = build_problem(cfg)
    axis = SweepAxis(cfg["axis"])
    dt = cfg["dt"] if axis is SweepAxis.PATHS else cfg["values"][0]
    base = build_config(problem, dict(cfg, dt=dt))
    ref = _reference_fn(problem, cfg)
    if ref is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution; pass --reference")
    result = run_sweep(problem, base, axis, cfg["values"], reference=ref,
                       replicates=cfg["replicates"], n_eval=cfg["n_eval"],
                       eval_seed=cfg["eval_seed"], jobs=cfg["jobs"])
    path = emit_csv(result, Path(cfg["out"]) / "sweep.csv")
    for row in result.rows():
        rate = row["rate"]
        rate = f"{rate:.4f}" if rate != "" else "-"
        print(f"{axis.value}={row[axis.value]:<12g} l2_error={row['l2_error']:.6e}  rate={rate}")
    print(f"fitted slope {result.fitted_slope:.4f} (r^2 {result.fit_r2:.4f}); written to {path}")
    if result.partial:
        print(f"sweep incomplete: {result.failure}", file=sys.stderr)
        return 1
    return 0


def cmd_reference(cfg: dict) -> int:
    problem = build_problem(cfg)
    config = build_config(problem, cfg)
    out = Path(cfg["out"])
    reference_solution(problem, config, out, _progress(config))
    print(f"reference for {problem.name} d={problem.d} written to {out}")
    return 0


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "reference": cmd_reference}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError) as err:
        print(f"pide-mc {args.command}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
