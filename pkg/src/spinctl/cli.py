"""Command-line interface.

Subcommands::

    spinctl check      --config CFG [--scan] [--out DIR]
    spinctl optimize   --config CFG --target T --time US [--seeds N] [--dt DT] [--out DIR]
    spinctl simulate   WAVEFORM --config CFG [--target T] [--snapshots TS]
                       [--dt DT] [--force] [--out DIR]
    spinctl wigner     --target T [--config CFG] [--out DIR]
    spinctl benchmark  --config CFG [--time TS] [--seeds N] [--out DIR]

``--config`` accepts either a built-in preset name (``cs-baseline``,
``cs-two-microwave``, ``two-level-toy``) or a path to a YAML file.  Report
paths write delimited text plus rendered figures side by side in ``--out``.

Exit codes: 0 success; 1 usage or input error; 2 negative domain verdict
(configuration not controllable, or best fidelity below the configured
threshold).

``SPINCTL_WORKERS`` (default 1) sets how many worker processes parallelize
independent seeds; results are identical for every worker count.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import configfile as cfg
from . import controllability as ctl
from . import optimizer as opt
from . import plotting
from . import records as rec
from . import simulator as sim
from . import waveform as wf
from . import wigner as wg
from .configfile import ConfigError

WORKERS_ENV = "SPINCTL_WORKERS"

_NORM_TOL = 1e-6


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def parse_target(text: str, system) -> np.ndarray:
    """Resolve a target-state argument to a normalized vector.

    Accepted forms: the named states ``stretched``, ``cat`` (equal
    superposition of the two opposite stretched states), and
    ``stretched-plus-cat`` (1/√2 on the upper stretched state, 1/2 on each
    lower-manifold edge state); ``ket:F,m`` for a single basis state; or a
    comma-separated list of complex amplitudes, one per basis state, which
    must already be normalized to within {tol}.
    """
    text = text.strip()
    fp, fm = system.f_plus, system.f_minus
    psi = np.zeros(system.dim, dtype=complex)
    if text == "stretched":
        return np.asarray(system.stretched_state(), dtype=complex)
    if text == "cat":
        psi[system.basis_index(fp, fp)] = 1.0
        psi[system.basis_index(fm, -fm)] = 1.0
        return psi / np.linalg.norm(psi)
    if text == "stretched-plus-cat":
        psi[system.basis_index(fp, fp)] += 1.0 / math.sqrt(2.0)
        psi[system.basis_index(fm, fm)] += 0.5
        psi[system.basis_index(fm, -fm)] += 0.5
        return psi / np.linalg.norm(psi)
    if text.startswith("ket:"):
        parts = text[4:].split(",")
        if len(parts) != 2:
            raise ValueError(f"target {text!r}: expected ket:F,m")
        try:
            f, m = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"target {text!r}: F and m must be numbers") from None
        psi[system.basis_index(f, m)] = 1.0
        return psi
    cells = text.split(",")
    if len(cells) != system.dim:
        raise ValueError(
            f"target vector has {len(cells)} amplitudes, expected {system.dim}"
        )
    try:
        vec = np.array([complex(c.strip().replace(" ", "")) for c in cells])
    except ValueError:
        raise ValueError(f"target {text!r}: could not parse amplitudes") from None
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(
            f"target vector is not normalized (norm {norm:.8f}); "
            "normalize it before passing it in"
        )
    return vec / norm


parse_target.__doc__ = parse_target.__doc__.format(tol=_NORM_TOL)


def _parse_float_list(text: str, option: str) -> tuple[float, ...]:
    try:
        values = tuple(float(c) for c in text.split(",") if c.strip())
    except ValueError:
        raise ValueError(f"{option}: expected comma-separated numbers, got {text!r}")
    if not values:
        raise ValueError(f"{option}: no values given")
    return values


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


@contextlib.contextmanager
def _seed_map():
    """Yield a map function for independent seeds (None = sequential)."""
    n = _worker_count()
    if n <= 1:
        yield None
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            yield pool.map


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _settings_payload(settings: opt.OptimizerSettings) -> dict:
    return {
        "step_size": settings.step_size,
        "max_iterations": settings.max_iterations,
        "gradient_tolerance": settings.gradient_tolerance,
        "fidelity_target": settings.fidelity_target,
        "seeds": settings.seeds,
        "line_search": settings.line_search,
        "stop_fidelity": settings.stop_fidelity,
    }


def _closure_line(config) -> tuple[str, bool]:
    result = ctl.is_controllable(config)
    verdict = "controllable" if result.controllable else "not controllable"
    return (
        f"closure dimension {result.dimension}/{result.max_dimension}, {verdict}",
        result.controllable,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    bundle = cfg.resolve_config(args.config)
    config = bundle.config
    print(f"configuration: {bundle.source}")
    for spec in config.channels:
        print(f"  channel {spec.label()}")
    line, controllable = _closure_line(config)
    print(line)
    if args.scan:
        scan = ctl.scan_configurations(config.system)
        out = _out_dir(args)
        rec.write_scan_csv(out / "scan.csv", scan)
        rec.write_scan_json(out / "scan.json", scan)
        plotting.plot_scan(scan, out / "scan.png")
        print((out / "scan.csv").read_text(encoding="utf-8"), end="")
        for name in ("scan.csv", "scan.json", "scan.png"):
            print(f"wrote {out / name}")
    return 0 if controllable else 2


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    bundle = cfg.resolve_config(args.config)
    config = bundle.config
    target = parse_target(args.target, config.system)
    total_time = float(args.time)
    dt = float(args.dt) if args.dt is not None else bundle.dt
    settings = bundle.settings
    if args.seeds is not None:
        if args.seeds < 1:
            raise ValueError("--seeds must be at least 1")
        settings = replace(settings, seeds=int(args.seeds))
    closure_line, controllable = _closure_line(config)
    if not controllable:
        print(f"warning: {closure_line}", file=sys.stderr)
    psi0 = config.system.stretched_state()
    problem = opt.StatePrepProblem(
        config=config, psi0=psi0, target=target, total_time=total_time, dt=dt
    )
    seed_list = tuple(range(settings.seeds))
    with _seed_map() as map_fn:
        result = opt.multi_seed_search(
            problem, settings, seed_list=seed_list, map_fn=map_fn
        )
    for outcome in result.outcomes:
        print(
            f"seed {outcome.seed}: fidelity {outcome.fidelity:.6f} "
            f"({outcome.reason}, {outcome.iterations} iterations)"
        )
    print(f"best seed {result.best_seed}: fidelity {result.best_fidelity:.6f}")
    out = _out_dir(args)
    record = {
        "format": rec.RUN_FORMAT,
        "command": "optimize",
        "config": cfg.config_to_dict(config),
        "config_source": bundle.source,
        "dt": dt,
        "total_time": total_time,
        "threshold": bundle.threshold,
        "target_spec": args.target,
        "target": rec.state_to_payload(target),
        "initial_state": rec.state_to_payload(psi0),
        "settings": _settings_payload(settings),
        "seed_list": [int(s) for s in seed_list],
        "closure_dimension": ctl.is_controllable(config).dimension,
        "controllable": controllable,
        "best": {
            "seed": result.best_seed,
            "fidelity": result.best_fidelity,
            "iterations": len(result.fidelity_history) - 1,
        },
        "outcomes": [
            {
                "seed": o.seed,
                "fidelity": o.fidelity,
                "iterations": o.iterations,
                "reason": o.reason,
            }
            for o in result.outcomes
        ],
        "waveform": rec.knots_to_payload(config, result.best_knots),
    }
    rec.write_record(out / "run.json", record, wall_time_s=time.perf_counter() - t0)
    wf.write_knots_csv(config, result.best_knots, out / "best_waveform.csv")
    rec.write_trace_csv(out / "fidelity_trace.csv", result.fidelity_history)
    controls = wf.interpolate(config, result.best_knots, dt)
    plotting.plot_waveform(config, controls, out / "waveform.png", result.best_knots)
    plotting.plot_fidelity_trace(result.fidelity_history, out / "fidelity_trace.png")
    for name in (
        "run.json",
        "best_waveform.csv",
        "fidelity_trace.csv",
        "waveform.png",
        "fidelity_trace.png",
    ):
        print(f"wrote {out / name}")
    if result.best_fidelity < bundle.threshold:
        print(
            f"best fidelity {result.best_fidelity:.6f} is below the "
            f"threshold {bundle.threshold}",
            file=sys.stderr,
        )
        return 2
    return 0


def _load_simulation_input(args):
    """Resolve waveform + config + target + dt from a CSV or a run record."""
    path = Path(args.waveform)
    if not path.exists():
        raise FileNotFoundError(f"waveform file not found: {path}")
    record = None
    if path.suffix.lower() == ".json":
        record = rec.read_record(path)
        config = cfg.config_from_dict(record["config"])
        if args.config is not None:
            config = cfg.resolve_config(args.config).config
        knots = rec.payload_to_knots(record["waveform"])
        dt = record.get("dt", wf.DEFAULT_DT)
    else:
        if args.config is None:
            raise ValueError("--config is required when simulating a waveform CSV")
        config = cfg.resolve_config(args.config).config
        knots = wf.read_knots_csv(config, path)
        dt = cfg.resolve_config(args.config).dt
    if args.dt is not None:
        dt = float(args.dt)
    target = None
    if args.target is not None:
        target = parse_target(args.target, config.system)
    elif record is not None and record.get("target") is not None:
        target = rec.payload_to_state(record["target"])
    psi0 = config.system.stretched_state()
    if record is not None and record.get("initial_state") is not None:
        psi0 = rec.payload_to_state(record["initial_state"])
    return config, knots, target, psi0, dt


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    config, knots, target, psi0, dt = _load_simulation_input(args)
    if knots.total_time <= 0:
        raise ValueError("zero-length waveform: total time must be positive")
    violations = wf.validate(config, knots)
    if violations:
        for v in violations:
            print(f"slew/bound violation: {v}", file=sys.stderr)
        if not args.force:
            print(
                f"aborting: waveform violates {len(violations)} constraint(s) "
                "(use --force to simulate it anyway)",
                file=sys.stderr,
            )
            return 1
        print("continuing despite violations (--force)", file=sys.stderr)
    snapshots: tuple[float, ...] = ()
    if args.snapshots:
        snapshots = _parse_float_list(args.snapshots, "--snapshots")
        bad = [t for t in snapshots if t < 0 or t > knots.total_time]
        if bad:
            raise ValueError(
                f"--snapshots: times {bad} fall outside [0, {knots.total_time}]"
            )
    controls = wf.interpolate(config, knots, dt)
    trajectory = sim.propagate(config, controls, psi0, snapshots=snapshots)
    final_fidelity = None
    if target is not None:
        final_fidelity = sim.fidelity(target, trajectory.final_state)
        print(f"final fidelity {final_fidelity:.8f}")
    out = _out_dir(args)
    labels = config.system.basis_labels()
    rec.write_trajectory_csv(
        out / "trajectory.csv", trajectory.times, trajectory.states, labels
    )
    plotting.plot_populations(
        trajectory.times, trajectory.states, labels, out / "populations.png"
    )
    written = ["trajectory.csv", "populations.png"]
    snapshot_payload = []
    for i, (t_snap, rho) in enumerate(
        zip(trajectory.snapshot_times, trajectory.snapshot_density_matrices())
    ):
        grid_name = f"wigner_{i:03d}.csv"
        fig_name = f"wigner_{i:03d}.png"
        grid = wg.export_grid(rho, config.system, out / grid_name)
        plotting.plot_wigner(grid, out / fig_name)
        written += [grid_name, fig_name]
        snapshot_payload.append(
            {
                "time": float(t_snap),
                "grid_file": grid_name,
                "figure_file": fig_name,
                "radii": {
                    "r_plus": grid.radii.r_plus,
                    "r_minus": grid.radii.r_minus,
                    "r_real": grid.radii.r_real,
                    "r_imag": grid.radii.r_imag,
                    "coherence": grid.radii.coherence,
                },
            }
        )
    record = {
        "format": rec.RUN_FORMAT,
        "command": "simulate",
        "config": cfg.config_to_dict(config),
        "dt": dt,
        "total_time": knots.total_time,
        "waveform": rec.knots_to_payload(config, knots),
        "initial_state": rec.state_to_payload(psi0),
        "target": None if target is None else rec.state_to_payload(target),
        "final_state": rec.state_to_payload(trajectory.final_state),
        "final_fidelity": final_fidelity,
        "forced": bool(args.force and violations),
        "snapshots": snapshot_payload,
    }
    rec.write_record(
        out / "simulate.json", record, wall_time_s=time.perf_counter() - t0
    )
    written.append("simulate.json")
    for name in written:
        print(f"wrote {out / name}")
    return 0


def cmd_wigner(args) -> int:
    bundle = cfg.resolve_config(args.config if args.config else "cs-baseline")
    system = bundle.config.system
    target = parse_target(args.target, system)
    out = _out_dir(args)
    grid = wg.export_grid(target, system, out / "wigner.csv")
    plotting.plot_wigner(grid, out / "wigner.png")
    r = grid.radii
    print(
        f"radii: upper {r.r_plus:.6f} lower {r.r_minus:.6f} "
        f"coherence {r.coherence:.6f} (real {r.r_real:.6f}, imag {r.r_imag:.6f})"
    )
    for name in ("wigner.csv", "wigner.png"):
        print(f"wrote {out / name}")
    return 0


def cmd_benchmark(args) -> int:
    bundle = cfg.resolve_config(args.config)
    plan = bundle.benchmark
    times = plan.times
    if args.time is not None:
        times = _parse_float_list(args.time, "--time")
    n_seeds = plan.n_seeds
    if args.seeds is not None:
        if args.seeds < 1:
            raise ValueError("--seeds must be at least 1")
        n_seeds = int(args.seeds)
    settings = replace(
        bundle.settings,
        max_iterations=plan.max_iterations,
        stop_fidelity=None,
        seeds=n_seeds,
    )
    with _seed_map() as map_fn:
        table = opt.benchmark(
            list(plan.variants),
            times,
            n_states=plan.n_states,
            n_seeds=n_seeds,
            dt=bundle.dt,
            settings=settings,
            state_seed=plan.state_seed,
            map_fn=map_fn,
        )
    out = _out_dir(args)
    rec.write_benchmark_csv(out / "benchmark.csv", table)
    rec.write_benchmark_long_csv(out / "benchmark_long.csv", table)
    plotting.plot_benchmark(table, out / "benchmark.png")
    for cell in table.cells:
        print(
            f"{cell.variant}  T={cell.total_time:g} µs  "
            f"mean {cell.mean_fidelity:.6f} ± {cell.std_error:.6f}"
        )
    for name in ("benchmark.csv", "benchmark_long.csv", "benchmark.png"):
        print(f"wrote {out / name}")
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinctl",
        description="rf/microwave control toolkit for hyperfine spin manifolds",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="controllability verdict for a configuration")
    p.add_argument("--config", required=True, help="preset name or YAML path")
    p.add_argument("--scan", action="store_true", help="scan all configuration axes")
    p.add_argument("--out", default=".", help="output directory for scan files")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", help="search for a state-preparation waveform")
    p.add_argument("--config", required=True, help="preset name or YAML path")
    p.add_argument("--target", required=True, help="target state specifier")
    p.add_argument("--time", required=True, type=float, help="total time in µs")
    p.add_argument("--seeds", type=int, help="number of random seeds")
    p.add_argument("--dt", type=float, help="integration step in µs")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="propagate a waveform file or run record")
    p.add_argument("waveform", help="waveform CSV or run-record JSON")
    p.add_argument("--config", help="preset name or YAML path")
    p.add_argument("--target", help="target state for the fidelity readout")
    p.add_argument("--snapshots", help="comma-separated snapshot times in µs")
    p.add_argument("--dt", type=float, help="integration step in µs")
    p.add_argument(
        "--force", action="store_true", help="simulate despite constraint violations"
    )
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("wigner", help="four-sphere fields of a target state")
    p.add_argument("--target", required=True, help="target state specifier")
    p.add_argument("--config", help="preset name or YAML path (sets the system)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("benchmark", help="random-target fidelity sweep")
    p.add_argument("--config", required=True, help="preset name or YAML path")
    p.add_argument("--time", help="comma-separated total times in µs")
    p.add_argument("--seeds", type=int, help="seeds per (variant, time, state)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into the IO/usage code.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
