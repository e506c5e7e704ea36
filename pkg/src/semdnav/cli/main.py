"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 episode ended in a collision.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .. import __version__
from ..avoidance.assemble import assemble, wiring_rows
from ..characterize.tuning import curves_csv, ingest_rows, run_grid, runs_csv
from ..snn.params import ConfigError
from ..world.environment import GenerationError, generate_environment
from ..world.episode import COLLIDED, run_episode
from .batch import grid_tasks, run_batch, summary_csv
from .batch import runs_csv as batch_runs_csv
from .config import BATCH_GRIDS, RunConfig, dump_tree, load_config, to_tree

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_COLLISION = 4


def provenance(cfg: RunConfig, command: str) -> list[str]:
    return [f"tool semdnav {__version__}", f"command {command}",
            f"config_hash {cfg.digest()}",
            f"seeds env={cfg.env_seed} network={cfg.net_seed}"]


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc.strerror}") from None
    return out


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _echo_config(cfg: RunConfig, out: Path, command: str) -> None:
    head = "".join(f"# {h}\n" for h in provenance(cfg, command))
    _write(out / "resolved_config.yaml", head + dump_tree(to_tree(cfg)))


# ---- subcommands --------------------------------------------------------

def cmd_characterize(cfg: RunConfig, args: argparse.Namespace) -> int:
    ch = cfg.characterize
    if args.frequencies:
        ch = replace(ch, frequencies_hz=tuple(args.frequencies))
    if args.contrasts:
        ch = replace(ch, contrasts=tuple(args.contrasts))
    if args.reps is not None:
        if args.reps < 1:
            raise ConfigError("--reps must be >= 1")
        ch = replace(ch, reps=args.reps)
    cfg = replace(cfg, characterize=ch)
    out = _out_dir(cfg)
    if args.ingest:
        rows = ingest_rows(_read_manifest(Path(args.ingest)), cfg.network, ch.camera,
                           ch.duration_s)
    else:
        rows = run_grid(ch.frequencies_hz, ch.contrasts, ch.directions, ch.reps,
                        cfg.env_seed, cfg.network, ch.camera, ch.duration_s, ch.sampling)
    head = provenance(cfg, "characterize")
    _write(out / "tuning_runs.csv", runs_csv(rows, head))
    _write(out / "tuning_curves.csv", curves_csv(rows, head))
    _echo_config(cfg, out, "characterize")
    n_deg = sum(r.degenerate for r in rows)
    print(f"characterize: {len(rows)} runs -> {out / 'tuning_runs.csv'}; "
          f"curves -> {out / 'tuning_curves.csv'}; {n_deg} degenerate runs")
    return EXIT_OK


def _read_manifest(path: Path) -> list[tuple[float, float, str, Path]]:
    """CSV ``frequency_hz,contrast,direction,path``; paths relative to the manifest."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc.strerror}") from None
    need = {"frequency_hz", "contrast", "direction", "path"}
    if not rows or not need <= set(rows[0]):
        raise ConfigError(f"{path}: manifest needs columns {', '.join(sorted(need))}")
    out = []
    for k, r in enumerate(rows, start=2):
        try:
            out.append((float(r["frequency_hz"]), float(r["contrast"]), r["direction"],
                        path.parent / r["path"]))
        except ValueError:
            raise ConfigError(f"{path}:{k}: bad number") from None
    return out


def _environment_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    kind = args.kind or cfg.environment_kind
    env = dict(cfg.environment) if kind == cfg.environment_kind else {}
    for flag, key in (("density", "density"), ("width", "width_au"), ("w_var", "w_var_au")):
        v = getattr(args, flag, None)
        if v is not None:
            env[key] = v
    defaults = {"clutter": {"density": 15.0}, "corridor": {"width_au": 15.0},
                "gap_arena": {"w_var_au": 10.0}}
    env = {**defaults.get(kind, {}), **env}
    return replace(cfg, environment_kind=kind, environment=env)


def cmd_episode(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg = _environment_overrides(cfg, args)
    ep = cfg.episode
    if args.budget_s is not None:
        ep = replace(ep, budget_s=args.budget_s)
    if args.fixed_velocity:
        ep = replace(ep, adaptive_velocity=False)
    cfg = replace(cfg, episode=ep)
    out = _out_dir(cfg)
    try:
        env = generate_environment(cfg.environment_kind, cfg.env_seed, **cfg.environment)
    except GenerationError as exc:
        raise ConfigError(f"environment: {exc}") from None
    res = run_episode(env, cfg.network, config=cfg.episode)
    head = provenance(cfg, "episode")
    res.trajectory.to_csv(out / "trajectory.csv", head)
    res.raster.to_csv(out / "raster.csv", head)
    env.to_csv(out / "environment.csv", head)
    row = res.summary_row()
    _write(out / "metrics.csv", "".join(f"# {h}\n" for h in head)
           + ",".join(row) + "\n" + ",".join(_cell(v) for v in row.values()) + "\n")
    if env.kind in ("corridor", "narrowing_corridor"):
        lines = ["t_s,lateral_au"] + [f"{t:.4f},{y:.6f}" for t, y in
                                      zip(res.trajectory.t_s.tolist(),
                                          res.lateral_series_au.tolist())]
        _write(out / "lateral.csv", "".join(f"# {h}\n" for h in head) + "\n".join(lines) + "\n")
    _echo_config(cfg, out, "episode")
    print(f"episode: {res.outcome} after {res.trajectory.t_s[-1]:.2f} s; files in {out}")
    return EXIT_COLLISION if res.outcome == COLLIDED else EXIT_OK


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_batch(cfg: RunConfig, args: argparse.Namespace) -> int:
    b = cfg.batch
    if args.grid:
        b = replace(b, grid=args.grid)
    if args.values:
        b = replace(b, values=tuple(args.values))
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        b = replace(b, seeds=tuple(range(args.seeds)))
    if args.compare_fixed:
        b = replace(b, compare_fixed_velocity=True)
    if args.parallelism is not None:
        if args.parallelism < 1:
            raise ConfigError("--parallelism must be >= 1")
        b = replace(b, parallelism=args.parallelism)
    ep = cfg.episode
    if args.budget_s is not None:
        ep = replace(ep, budget_s=args.budget_s)
    cfg = replace(cfg, batch=b, episode=ep)
    out = _out_dir(cfg)
    tasks = grid_tasks(b.grid, b.values, b.seeds, ep.budget_s, b.compare_fixed_velocity)
    results = run_batch(tasks, b.parallelism, cfg.network, ep)
    head = provenance(cfg, "batch")
    _write(out / "batch_runs.csv", batch_runs_csv(results, head))
    _write(out / "batch_summary.csv", summary_csv(results, head))
    _echo_config(cfg, out, "batch")
    n_err = sum(1 for r in results if r.error)
    print(f"batch: {len(results)} episodes ({n_err} failed) -> {out / 'batch_runs.csv'}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    from ..validation import CHECKS, run_all

    if args.only:
        unknown = [n for n in args.only if n not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
    results = run_all(args.inject, args.only)
    out = _out_dir(cfg)
    head = provenance(cfg, "validate" + (f" --inject {args.inject}" if args.inject else ""))
    lines = ["check,passed,detail"] + [f"{r.name},{int(r.passed)},\"{r.detail}\""
                                       for r in results]
    _write(out / "validate_report.csv",
           "".join(f"# {h}\n" for h in head) + "\n".join(lines) + "\n")
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def cmd_dump_wiring(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = _out_dir(cfg)
    net = assemble(cfg.network)
    head = provenance(cfg, "dump-wiring")
    with open(out / "wiring.csv", "w", encoding="utf-8", newline="") as fh:
        for h in head:
            fh.write(f"# {h}\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in wiring_rows(net):
            w.writerow(row)
    c = net.census()
    _write(out / "census.csv", "".join(f"# {h}\n" for h in head)
           + "neurons,synapses,sources\n" + f"{c['neurons']},{c['synapses']},{c['sources']}\n")
    _echo_config(cfg, out, "dump-wiring")
    print(f"dump-wiring: {c['synapses']} synapses, {c['neurons']} neurons -> "
          f"{out / 'wiring.csv'}")
    return EXIT_OK


# ---- argument parsing ---------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="environment and network seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--parallelism", type=int, help="worker processes (batch)")

    p = argparse.ArgumentParser(prog="semdnav", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"semdnav {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("characterize", parents=[common], help="grating tuning curves")
    c.add_argument("--frequencies", type=float, nargs="+", help="temporal frequencies, Hz")
    c.add_argument("--contrasts", type=float, nargs="+", help="printed contrasts in [0, 1]")
    c.add_argument("--reps", type=int, help="repetitions per grid point")
    c.add_argument("--ingest", help="manifest CSV of recorded event files")
    c.set_defaults(func=cmd_characterize)

    kinds = ("clutter", "corridor", "gap_arena", "empty_box", "narrowing_corridor")
    e = sub.add_parser("episode", parents=[common], help="one closed-loop run")
    e.add_argument("--kind", choices=kinds)
    e.add_argument("--density", type=float, help="clutter density, %%")
    e.add_argument("--width", type=float, help="corridor width, a.u.")
    e.add_argument("--w-var", dest="w_var", type=float, help="variable gap width, a.u.")
    e.add_argument("--budget-s", dest="budget_s", type=float)
    e.add_argument("--fixed-velocity", action="store_true",
                   help="fixed intersaccadic speed instead of the adaptive law")
    e.set_defaults(func=cmd_episode)

    b = sub.add_parser("batch", parents=[common], help="grid of episodes")
    b.add_argument("--grid", choices=BATCH_GRIDS)
    b.add_argument("--values", type=float, nargs="+",
                   help="densities %%, widths a.u., gap widths a.u. or n_connect values")
    b.add_argument("--seeds", type=int, help="number of seeds per cell")
    b.add_argument("--budget-s", dest="budget_s", type=float)
    b.add_argument("--compare-fixed", dest="compare_fixed", action="store_true",
                   help="also run every cell at the fixed speed")
    b.set_defaults(func=cmd_batch)

    v = sub.add_parser("validate", parents=[common], help="structural invariant suite")
    v.add_argument("--inject", choices=("tde-decay-sign", "no-mot-wta"),
                   help="deliberate fault that must make a check fail")
    v.add_argument("--only", nargs="+", help="run only these checks")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("dump-wiring", parents=[common], help="every synapse as CSV")
    d.set_defaults(func=cmd_dump_wiring)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.out:
            cfg = replace(cfg, out_dir=args.out)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
