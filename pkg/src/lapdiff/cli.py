"""Command-line interface: scenario configuration, runs, sweeps, artifacts.

Subcommands
    generate   write a ground-truth trace CSV from the kinematic fleet model
    run        execute a scenario and emit metric CSVs plus summary/manifest
    sweep      repeat a scenario across one swept parameter

Configuration is an INI file whose sections mirror the ScenarioConfig fields;
CLI flags override file values, and the LAPDIFF_SEED environment variable
overrides the seed last (for CI matrix runs).  Numbers are serialized with 17
significant digits so parsing an emitted CSV recovers the exact float.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime divergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .diffusion import DelayPolicy, InitPolicy
from .errors import ConfigError, DivergenceError, LapdiffError
from .graph import GraphConfig
from .sensing import NoiseConfig
from .simulator import (
    ALGORITHMS,
    MetricsRecord,
    ScenarioConfig,
    TrajectorySource,
    run_scenario,
    run_sweep,
    sweep_axes,
)
from .trajectories import ControlPolicy, generate_fleet, write_trace_csv
from .rng import Stream, substream

SEED_ENV_VAR = "LAPDIFF_SEED"


def _fmt(x) -> str:
    return format(float(x), ".17g")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors (exit 1)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# configuration file
# ---------------------------------------------------------------------------

_KNOWN_KEYS = {
    "scenario": {"n", "horizon", "iterations", "dt", "seed", "algorithms", "reporting_agent"},
    "graph": {"comm_range", "max_neighbors"},
    "noise": {"sigma_x", "sigma_y", "sigma_d", "sigma_az_deg"},
    "delay": {"mode", "tau_values", "probability", "fraction"},
    "init": {"mode", "threshold"},
    "trajectory": {"source", "path", "objective"},
    "cg": {"update", "forgetting"},
    "control": {
        "speed_min", "speed_max", "turn_min", "turn_max", "resample_every",
        "speed_jitter", "turn_jitter",
    },
}


def load_config(path: str | None) -> ScenarioConfig:
    """Parse an INI scenario file; missing keys take the package defaults."""
    if path is None:
        return ScenarioConfig()
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")

    def get(section, key, conv, default):
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            try:
                return conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc
        return default

    try:
        defaults = ScenarioConfig()
        graph = GraphConfig(
            comm_range=get("graph", "comm_range", float, defaults.graph.comm_range),
            max_neighbors=get("graph", "max_neighbors", int, defaults.graph.max_neighbors),
        )
        noise = NoiseConfig.from_degrees(
            sigma_x=get("noise", "sigma_x", float, defaults.noise.sigma_x),
            sigma_y=get("noise", "sigma_y", float, defaults.noise.sigma_y),
            sigma_d=get("noise", "sigma_d", float, defaults.noise.sigma_d),
            sigma_az_deg=get("noise", "sigma_az_deg", float, math.degrees(defaults.noise.sigma_az)),
        )
        delay = DelayPolicy(
            mode=get("delay", "mode", str, defaults.delay.mode),
            tau_values=get(
                "delay", "tau_values",
                lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
                defaults.delay.tau_values,
            ),
            probability=get("delay", "probability", float, defaults.delay.probability),
            fraction=get("delay", "fraction", float, defaults.delay.fraction),
        )
        init = InitPolicy(
            mode=get("init", "mode", str, defaults.init.mode),
            threshold=get("init", "threshold", float, defaults.init.threshold),
        )
        trajectory = TrajectorySource(
            kind=get("trajectory", "source", str, defaults.trajectory.kind),
            path=get("trajectory", "path", str, defaults.trajectory.path),
            objective=get("trajectory", "objective", int, defaults.trajectory.objective),
        )
        control = ControlPolicy(
            speed_range=(
                get("control", "speed_min", float, defaults.control.speed_range[0]),
                get("control", "speed_max", float, defaults.control.speed_range[1]),
            ),
            turn_range=(
                get("control", "turn_min", float, defaults.control.turn_range[0]),
                get("control", "turn_max", float, defaults.control.turn_range[1]),
            ),
            resample_every=get("control", "resample_every", int, defaults.control.resample_every),
            speed_jitter=get("control", "speed_jitter", float, defaults.control.speed_jitter),
            turn_jitter=get("control", "turn_jitter", float, defaults.control.turn_jitter),
        )
        return ScenarioConfig(
            n=get("scenario", "n", int, defaults.n),
            horizon=get("scenario", "horizon", int, defaults.horizon),
            iterations=get("scenario", "iterations", int, defaults.iterations),
            dt=get("scenario", "dt", float, defaults.dt),
            graph=graph,
            noise=noise,
            algorithms=get(
                "scenario", "algorithms",
                lambda s: tuple(a.strip() for a in s.split(",") if a.strip()),
                defaults.algorithms,
            ),
            delay=delay,
            init=init,
            seed=get("scenario", "seed", int, defaults.seed),
            trajectory=trajectory,
            control=control,
            reporting_agent=get("scenario", "reporting_agent", int, defaults.reporting_agent),
            cg_update=get("cg", "update", str, defaults.cg_update),
            cg_forgetting=get("cg", "forgetting", float, defaults.cg_forgetting),
        )
    except LapdiffError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    if getattr(args, "algorithms", None):
        cfg = replace(cfg, algorithms=tuple(a.strip() for a in args.algorithms.split(",")))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            cfg = replace(cfg, seed=int(env_seed))
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from exc
    return cfg


def config_digest(cfg: ScenarioConfig) -> str:
    """Platform-stable sha256 of the canonical config JSON."""
    payload = json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# artifact writers / readers
# ---------------------------------------------------------------------------


def write_amsd_csv(record: MetricsRecord, path: Path) -> int:
    algos = [a for a in record.algorithms if a in record.amsd]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k"] + algos)
        for k in range(record.config.iterations):
            writer.writerow([k + 1] + [_fmt(record.amsd[a][k]) for a in algos])
    return record.config.iterations


def write_lmse_csv(record: MetricsRecord, path: Path) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "gps"] + list(record.algorithms))
        for t in range(record.horizon):
            writer.writerow(
                [t, _fmt(record.gps_lmse[t])] + [_fmt(record.lmse[a][t]) for a in record.algorithms]
            )
    return record.horizon


def write_cdf_csv(record: MetricsRecord, path: Path) -> int:
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value", "quantile", "algorithm"])
        for algo in record.algorithms:
            for value, quantile in record.cdf[algo]:
                writer.writerow([_fmt(value), _fmt(quantile), algo])
                rows += 1
    return rows


def write_connectivity_csv(record: MetricsRecord, path: Path) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "lambda2"])
        for t, value in enumerate(record.connectivity):
            writer.writerow([t, _fmt(value)])
    return len(record.connectivity)


def read_metric_csv(path) -> dict[str, np.ndarray]:
    """Read any of the emitted numeric CSVs back into column arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns: dict[str, list] = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                columns[name].append(value)
    out = {}
    for name, values in columns.items():
        try:
            out[name] = np.array([float(v) for v in values])
        except ValueError:
            out[name] = np.array(values)
    return out


def write_summary_json(record: MetricsRecord, path: Path) -> None:
    connectivity = record.connectivity
    summary = {
        "algorithms": list(record.algorithms),
        "seed": record.config.seed,
        "horizon": record.horizon,
        "iterations": record.config.iterations,
        "n": record.config.n,
        "reductions": {a: record.reduction[a] for a in record.algorithms},
        "mean_lmse": {a: float(np.mean(record.lmse[a])) for a in record.algorithms},
        "gps_mean_lmse": float(np.mean(record.gps_lmse)),
        "connectivity": {
            "mean": float(connectivity.mean()),
            "min": float(connectivity.min()),
            "max": float(connectivity.max()),
        },
        "timings_ms": {a: record.timings_ms[a] for a in record.algorithms},
    }
    path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_manifest(cfg: ScenarioConfig, files: dict[str, int], path: Path) -> None:
    manifest = {
        "config_sha256": config_digest(cfg),
        "seed": cfg.seed,
        "version": __version__,
        "files": {name: files[name] for name in sorted(files)},
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _prepare_out_dir(out: str, force: bool) -> Path:
    path = Path(out)
    if path.exists() and any(path.iterdir()) and not force:
        raise ConfigError(f"output directory {out!r} is not empty (use --force to overwrite)")
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_run_outputs(record: MetricsRecord, out_dir: Path) -> dict[str, int]:
    files = {
        "amsd.csv": write_amsd_csv(record, out_dir / "amsd.csv"),
        "lmse.csv": write_lmse_csv(record, out_dir / "lmse.csv"),
        "cdf.csv": write_cdf_csv(record, out_dir / "cdf.csv"),
        "connectivity.csv": write_connectivity_csv(record, out_dir / "connectivity.csv"),
    }
    write_summary_json(record, out_dir / "summary.json")
    files["summary.json"] = 1
    write_manifest(record.config, files, out_dir / "manifest.json")
    files["manifest.json"] = 1
    return files


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    rng = substream(cfg.seed, Stream.CONTROL)
    traj = generate_fleet(cfg.n, cfg.horizon, cfg.dt, cfg.control, rng)
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ConfigError(f"output file {args.out!r} exists (use --force to overwrite)")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = write_trace_csv(traj, out)
    print(f"wrote {rows} rows to {out}")
    return 0


def cmd_run(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    out_dir = _prepare_out_dir(args.out, args.force)
    record = run_scenario(cfg)
    write_run_outputs(record, out_dir)
    reductions = ", ".join(f"{a}={record.reduction[a]:.3f}" for a in record.algorithms)
    print(f"run complete: seed={cfg.seed} horizon={record.horizon} reductions: {reductions}")
    return 0


def _sanitize(value: str) -> str:
    return str(value).replace(":", "-").replace("/", "-")


def cmd_sweep(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values must list at least one value")
    out_dir = _prepare_out_dir(args.out, args.force)
    records = run_sweep(cfg, args.axis, values)
    summary_rows = []
    for value, record in zip(values, records):
        sub = out_dir / f"{args.axis}={_sanitize(value)}"
        sub.mkdir(parents=True, exist_ok=True)
        write_run_outputs(record, sub)
        row = {"axis": args.axis, "value": value}
        for algo in record.algorithms:
            row[f"reduction_{algo}"] = record.reduction[algo]
        summary_rows.append(row)
    algos = records[0].algorithms
    with open(out_dir / "sweep_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["axis", "value"] + [f"reduction_{a}" for a in algos])
        for row in summary_rows:
            writer.writerow(
                [row["axis"], row["value"]] + [_fmt(row[f"reduction_{a}"]) for a in algos]
            )
    print(f"sweep complete: {len(records)} runs under {out_dir}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="lapdiff", description="Graph-Laplacian cooperative localization simulator")
    parser.add_argument("--version", action="version", version=f"lapdiff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI scenario file (defaults used when omitted)")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")

    gen = sub.add_parser("generate", parents=[common], help="write a ground-truth trace CSV")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", parents=[common], help="run a scenario and emit metrics")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--algorithms", help="comma-separated subset of " + ",".join(ALGORITHMS))
    run.set_defaults(func=cmd_run)

    swp = sub.add_parser("sweep", parents=[common], help="run a one-axis parameter sweep")
    swp.add_argument("--out", required=True, help="output directory")
    swp.add_argument("--algorithms", help="comma-separated subset of " + ",".join(ALGORITHMS))
    swp.add_argument("--axis", required=True, help="one of: " + ", ".join(sweep_axes()))
    swp.add_argument("--values", required=True, help="comma-separated values for the axis")
    swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LapdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
