"""Command-line front end.

Exit codes: 0 success, 2 bad input (unreadable/invalid files, bad
geometry, bad flags), 3 runtime failure (e.g. a mean-field trajectory
leaving the simplex).
"""
import argparse
import json
import sys
import time
from pathlib import Path

from .automaton import parse_automaton
from .errors import InputError, SimulationError
from .experiment import run_experiment, summarize
from .meanfield import DEFAULT_C_BIN, derive_polynomial
from .output import (write_counts, write_ensemble, write_frame,
                     write_metadata, write_runs, write_trajectory)
from .runner import run_scenario
from .scenario import (BUNDLED_AUTOMATA, builtin_automaton, load_scenario,
                       with_overrides)
from .spatial import alpha_from_geometry

EXIT_INPUT = 2
EXIT_RUNTIME = 3


def _load_automaton(ref):
    path = Path(ref)
    if path.is_file():
        return parse_automaton(path.read_text("utf-8"))
    if ref in BUNDLED_AUTOMATA:
        return builtin_automaton(ref)
    raise InputError(f"no automaton file or bundled automaton named {ref!r}")


def cmd_derive(args):
    a = _load_automaton(args.automaton)
    system = derive_polynomial(a, args.alpha, args.c_bin)
    print(system.format(args.precision))


def cmd_alpha(args):
    print(f"{alpha_from_geometry(args.r, args.width * args.height, args.m):.6g}")


def _write_frames(out, species, frames):
    if not frames:
        return
    folder = out / "frames"
    for t, ids, states, pos in frames:
        write_frame(folder / f"frame_{t}.csv", species, ids, states, pos)
    return folder


def cmd_run(args):
    cfg = load_scenario(args.scenario)
    alpha = args.alpha
    cfg = with_overrides(cfg, model=args.model, alpha=alpha, c_bin=args.c_bin,
                         seed=args.seed, replicates=args.replicates, T=args.steps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    began = time.perf_counter()
    result = run_scenario(cfg, jobs=args.jobs, frame_every=args.frames)
    elapsed = time.perf_counter() - began

    species = cfg.automaton.species
    meta = dict(model=cfg.model, seed=cfg.seed, scenario_hash=cfg.hash(),
                alpha=result.alpha, c_bin=cfg.c_bin, m=cfg.m, T=cfg.T,
                wall_clock_seconds=round(elapsed, 3))
    written = []
    if cfg.model == "mean":
        path = write_trajectory(out / "trajectory.csv", species, result.trajectory)
        write_metadata(path, streams=0, **meta)
        written.append(path)
    else:
        ens = result.ensemble
        path = write_ensemble(out / "ensemble.csv", species, ens.mean, ens.std)
        write_metadata(path, streams=cfg.replicates, **meta)
        written.append(path)
        path = write_counts(out / "counts.csv", species, ens.runs[0])
        write_metadata(path, streams=1, replicate=0, **meta)
        written.append(path)
        folder = _write_frames(out, species, result.frames)
        if folder is not None:
            write_metadata(out / "frames.csv", streams=1, replicate=0,
                           frame_every=args.frames, **meta)
    for path in written:
        print(path)


def cmd_experiment(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    began = time.perf_counter()
    res = run_experiment(args.variant, seed=args.seed, replicates=args.replicates,
                         T=args.steps, jobs=args.jobs, frame_every=args.frames)
    elapsed = time.perf_counter() - began
    species = ("A", "B", "C", "D", "E")
    R = res.spatial.shape[0]
    meta = dict(variant=args.variant, seed=args.seed, alpha=res.alpha,
                m=int(res.spatial[0, 0].sum()), T=res.spatial.shape[1] - 1,
                wall_clock_seconds=round(elapsed, 3))

    for name, runs in (("spatial", res.spatial), ("ssa", res.ssa)):
        mean, std = runs.mean(axis=0), (runs.std(axis=0, ddof=1) if R > 1 else 0 * runs[0])
        path = write_ensemble(out / f"{name}_ensemble.csv", species, mean, std)
        write_metadata(path, model=name, streams=R, c_bin=None, **meta)
        path = write_runs(out / f"{name}_runs.csv", species, runs)
        write_metadata(path, model=name, streams=R, c_bin=None, **meta)
    path = write_trajectory(out / "mean.csv", species, res.mean)
    write_metadata(path, model="mean", streams=0, c_bin=res.c_bin,
                   units="expected counts", **meta)
    path = write_trajectory(out / "mean_matched.csv", species, res.mean_matched)
    write_metadata(path, model="mean", streams=0, c_bin=1.0,
                   matched_to="ssa pairing", units="expected counts", **meta)
    if _write_frames(out, species, res.frames) is not None:
        write_metadata(out / "frames.csv", model="spatial", streams=1, replicate=0,
                       frame_every=args.frames, c_bin=None, **meta)
    summary = summarize(res)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary, indent=2))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="massaction",
        description="Mean-field, well-stirred and spatial dynamics of particle automata.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="print the mean-field polynomial system")
    p.add_argument("automaton", help="automaton file, or a bundled name (table1, five_species)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c-bin", type=float, default=DEFAULT_C_BIN)
    p.add_argument("--precision", type=int, default=2)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("run", help="run a scenario and write CSV output")
    p.add_argument("scenario", help="scenario file, or a bundled scenario name")
    p.add_argument("--out", default="out")
    p.add_argument("--model", choices=("mean", "ssa", "spatial"))
    p.add_argument("--alpha", type=_alpha_arg)
    p.add_argument("--c-bin", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--steps", type=int, help="override the horizon T")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--frames", type=int, metavar="CADENCE",
                   help="dump particle positions every CADENCE steps (spatial)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("alpha", help="density parameter implied by the geometry")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("experiment", help="five-species spatial vs well-stirred comparison")
    p.add_argument("variant", choices=("a", "b", "c"))
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--steps", type=int, help="override the horizon T")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--frames", type=int, metavar="CADENCE")
    p.set_defaults(func=cmd_experiment)
    return parser


def _alpha_arg(text):
    return text if text == "geometry" else float(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimulationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
