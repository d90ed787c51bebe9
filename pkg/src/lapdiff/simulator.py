"""Scenario orchestration: the full per-step experiment loop and its metrics.

Per time step the simulator rebuilds the vehicle graph, samples measurements,
derives differential coordinates, initializes every selected algorithm
(honoring membership resets), runs the configured number of iterations and
records the metrics:

* AMSD(k): normalized average mean-square deviation of all agents' estimate
  matrices from the true positions, averaged over time steps, one value per
  iteration.  The centralized baseline contributes a flat line.
* LMSE(t): mean squared position error of the reporting agent's final
  estimates (the reporting agent is fixed by configuration, not random, for
  reproducibility).
* Empirical CDF of the LMSE samples, GPS-error reduction per algorithm,
  per-step algebraic connectivity and per-algorithm wall-clock totals.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .centralized import cll_solve, lmse, solution_lmse
from .diffusion import (
    DelayPolicy,
    InitPolicy,
    gllms_iterate,
    gllme_iterate,
    glcg_iterate,
    initial_estimates,
    make_agents,
    reset_on_membership_change,
)
from .errors import ConfigError, InvalidInputError
from .graph import GraphConfig, VanetGraph, algebraic_connectivity, build_graph, metropolis_weights
from .rng import Stream, measurement_streams, substream
from .sensing import NoiseConfig, differential_coords, sample_measurements
from .trajectories import ControlPolicy, TrajectorySet, generate_fleet, ingest_traces

ALGORITHMS = ("cll", "gllms", "gllme", "glcg")

_ITERATE = {"gllms": gllms_iterate, "gllme": gllme_iterate}


@dataclass(frozen=True)
class TrajectorySource:
    kind: str = "kinematic"  # "kinematic" | "trace"
    path: str | None = None
    objective: int | None = None  # restrict each step to this vehicle's cluster

    def __post_init__(self):
        if self.kind not in ("kinematic", "trace"):
            raise ConfigError(f"unknown trajectory source {self.kind!r}")
        if self.kind == "trace" and not self.path:
            raise ConfigError("trace trajectory source needs a path")


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 13
    horizon: int = 500
    iterations: int = 70
    dt: float = 0.1
    graph: GraphConfig = GraphConfig()
    noise: NoiseConfig = NoiseConfig()
    algorithms: tuple[str, ...] = ALGORITHMS
    delay: DelayPolicy = DelayPolicy()
    init: InitPolicy = InitPolicy()
    seed: int = 42
    trajectory: TrajectorySource = TrajectorySource()
    control: ControlPolicy = ControlPolicy()
    reporting_agent: int = 0
    cg_update: str = "standard"
    cg_forgetting: float = 0.2

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm must be selected")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms: {unknown}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("duplicate algorithm selection")
        if self.trajectory.kind == "kinematic" and not 0 <= self.reporting_agent < self.n:
            raise ConfigError(f"reporting_agent {self.reporting_agent} out of range")
        if self.cg_update not in ("standard", "paper"):
            raise ConfigError(f"unknown cg_update {self.cg_update!r}")
        if not 0.0 < self.cg_forgetting < 1.0:
            raise ConfigError("cg_forgetting must be in (0, 1)")


@dataclass
class MetricsRecord:
    config: ScenarioConfig
    algorithms: tuple[str, ...]
    amsd: dict[str, np.ndarray]  # per algorithm, one value per iteration
    lmse: dict[str, np.ndarray]  # per algorithm, one value per time step
    gps_lmse: np.ndarray
    cdf: dict[str, list[tuple[float, float]]]
    reduction: dict[str, float]
    timings_ms: dict[str, float]
    connectivity: np.ndarray
    horizon: int
    # populated only when run_scenario(keep_estimates=True)
    truth: list[np.ndarray] = field(default_factory=list)
    final_estimates: dict[str, list[np.ndarray]] = field(default_factory=dict)


def empirical_cdf(samples) -> list[tuple[float, float]]:
    """Sorted (value, i/n) pairs; the right-continuous empirical CDF."""
    values = sorted(float(s) for s in samples)
    if not values:
        raise InvalidInputError("empirical_cdf needs at least one sample")
    n = len(values)
    return [(v, (i + 1) / n) for i, v in enumerate(values)]


def _load_trajectories(cfg: ScenarioConfig) -> TrajectorySet:
    if cfg.trajectory.kind == "trace":
        return ingest_traces(cfg.trajectory.path)
    return generate_fleet(
        cfg.n, cfg.horizon, cfg.dt, cfg.control, substream(cfg.seed, Stream.CONTROL)
    )


def _induced_subgraph(graph: VanetGraph, members: list[int]) -> VanetGraph:
    adjacency = graph.adjacency[np.ix_(members, members)]
    degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency
    neighborhoods = tuple(
        tuple(sorted([i] + [l for l in range(len(members)) if adjacency[i, l]]))
        for i in range(len(members))
    )
    return VanetGraph(adjacency, degrees, laplacian, neighborhoods)


def _connected_component(graph: VanetGraph, start: int) -> list[int]:
    seen = {start}
    frontier = [start]
    while frontier:
        i = frontier.pop()
        for l in graph.neighbors_of(i):
            if l not in seen:
                seen.add(l)
                frontier.append(l)
    return sorted(seen)


def run_scenario(cfg: ScenarioConfig, keep_estimates: bool = False) -> MetricsRecord:
    traj = _load_trajectories(cfg)
    horizon = cfg.horizon if cfg.trajectory.kind == "kinematic" else traj.horizon
    if cfg.trajectory.kind == "trace" and cfg.horizon < traj.horizon:
        horizon = cfg.horizon
    objective = cfg.trajectory.objective
    if objective is not None and objective not in traj.vehicle_ids:
        raise ConfigError(f"objective vehicle {objective} not present in the trajectories")

    K = cfg.iterations
    diffusion_algos = [a for a in cfg.algorithms if a != "cll"]
    amsd_sums = {a: np.zeros(K) for a in diffusion_algos}
    cll_dev_sum = 0.0
    lmse_series: dict[str, list[float]] = {a: [] for a in cfg.algorithms}
    gps_series: list[float] = []
    connectivity: list[float] = []
    timings = {a: 0.0 for a in cfg.algorithms}
    prev_solutions: dict[str, list[np.ndarray] | None] = {a: None for a in diffusion_algos}
    prev_ids: dict[str, tuple[int, ...] | None] = {a: None for a in diffusion_algos}
    record_truth: list[np.ndarray] = []
    record_estimates: dict[str, list[np.ndarray]] = {a: [] for a in diffusion_algos}

    for t in range(horizon):
        positions = traj.positions[t]
        ids = traj.vehicle_ids
        graph = build_graph(positions, cfg.graph)
        if objective is not None:
            members = _connected_component(graph, ids.index(objective))
            positions = positions[members]
            ids = tuple(traj.vehicle_ids[j] for j in members)
            graph = _induced_subgraph(graph, members)
        n_t = graph.n
        connectivity.append(algebraic_connectivity(graph) if n_t >= 2 else 0.0)

        streams = measurement_streams(cfg.seed, t)
        ms = sample_measurements(positions, graph, cfg.noise, streams)
        diffs = differential_coords(ms, graph)
        C = metropolis_weights(graph)
        gps_series.append(lmse(ms.gps, positions))
        norm_p = float(np.sum(positions**2))
        if keep_estimates:
            record_truth.append(positions.copy())

        if objective is not None:
            reporting = ids.index(objective)
        else:
            reporting = cfg.reporting_agent

        for algo_index, algo in enumerate(cfg.algorithms):
            if algo == "cll":
                start = time.perf_counter()
                sol = cll_solve(graph, diffs, ms.gps)
                timings[algo] += time.perf_counter() - start
                lmse_series[algo].append(solution_lmse(sol, positions))
                cll_dev_sum += float(np.sum((positions - sol.positions) ** 2)) / norm_p
                continue

            start = time.perf_counter()
            reset = prev_ids[algo] is None or reset_on_membership_change(prev_ids[algo], ids)
            prev = None if reset else prev_solutions[algo]
            init_stack = initial_estimates(graph, ms.gps, prev, cfg.init)
            agents = make_agents(graph, init_stack, max_lag=cfg.delay.max_lag)
            sums = amsd_sums[algo]

            def on_iteration(k, W, sums=sums, positions=positions, norm_p=norm_p):
                dev = float(np.mean(np.sum((positions[None] - W) ** 2, axis=(1, 2))))
                sums[k - 1] += dev / norm_p

            delay_rng = substream(cfg.seed, Stream.DELAY, algo_index, t)
            if algo == "glcg":
                agents = glcg_iterate(
                    agents, graph, C, diffs, K,
                    forgetting=cfg.cg_forgetting, delay=cfg.delay, rng=delay_rng,
                    update=cfg.cg_update, on_iteration=on_iteration, time_step=t,
                )
            else:
                agents = _ITERATE[algo](
                    agents, graph, C, diffs, K,
                    delay=cfg.delay, rng=delay_rng,
                    on_iteration=on_iteration, time_step=t,
                )
            timings[algo] += time.perf_counter() - start

            prev_solutions[algo] = [agent.w for agent in agents]
            prev_ids[algo] = ids
            lmse_series[algo].append(lmse(agents[reporting].w, positions))
            if keep_estimates:
                record_estimates[algo].append(np.stack([agent.w for agent in agents]))

    amsd = {a: amsd_sums[a] / horizon for a in diffusion_algos}
    if "cll" in cfg.algorithms:
        amsd["cll"] = np.full(K, cll_dev_sum / horizon)
    gps_arr = np.asarray(gps_series)
    gps_mean = float(gps_arr.mean())
    reduction = {}
    cdf = {}
    lmse_arrays = {}
    for algo in cfg.algorithms:
        series = np.asarray(lmse_series[algo])
        lmse_arrays[algo] = series
        reduction[algo] = float(1.0 - series.mean() / gps_mean) if gps_mean > 0 else 0.0
        cdf[algo] = empirical_cdf(series)

    return MetricsRecord(
        config=cfg,
        algorithms=cfg.algorithms,
        amsd=amsd,
        lmse=lmse_arrays,
        gps_lmse=gps_arr,
        cdf=cdf,
        reduction=reduction,
        timings_ms={a: timings[a] * 1e3 for a in cfg.algorithms},
        connectivity=np.asarray(connectivity),
        horizon=horizon,
        truth=record_truth,
        final_estimates=record_estimates if keep_estimates else {},
    )


# sweepable axes: value parser + config transformer
_SWEEP_AXES = {
    "n": lambda cfg, v: replace(cfg, n=int(v)),
    "n_max": lambda cfg, v: replace(cfg, graph=replace(cfg.graph, max_neighbors=int(v))),
    "comm_range": lambda cfg, v: replace(cfg, graph=replace(cfg.graph, comm_range=float(v))),
    "sigma_d": lambda cfg, v: replace(cfg, noise=replace(cfg.noise, sigma_d=float(v))),
    "sigma_az_deg": lambda cfg, v: replace(
        cfg, noise=replace(cfg.noise, sigma_az=math.radians(float(v)))
    ),
    "range_noise": lambda cfg, v: _range_noise(cfg, v),
    "delay_mode": lambda cfg, v: replace(cfg, delay=replace(cfg.delay, mode=str(v))),
    "iterations": lambda cfg, v: replace(cfg, iterations=int(v)),
    "horizon": lambda cfg, v: replace(cfg, horizon=int(v)),
    "seed": lambda cfg, v: replace(cfg, seed=int(v)),
}


def _range_noise(cfg: ScenarioConfig, value) -> ScenarioConfig:
    """Joint (sigma_d, sigma_az) axis; values look like '4:7' (meters:degrees)."""
    try:
        d_part, az_part = str(value).split(":")
        sigma_d = float(d_part)
        sigma_az = math.radians(float(az_part))
    except ValueError as exc:
        raise ConfigError(f"range_noise value must be 'sigma_d:sigma_az_deg', got {value!r}") from exc
    return replace(cfg, noise=replace(cfg.noise, sigma_d=sigma_d, sigma_az=sigma_az))


def sweep_axes() -> tuple[str, ...]:
    return tuple(_SWEEP_AXES)


def run_sweep(base: ScenarioConfig, axis: str, values) -> list[MetricsRecord]:
    """One record per value; every run shares the base seed so records differ
    only in the swept axis."""
    if axis not in _SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(_SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    return [run_scenario(_SWEEP_AXES[axis](base, v)) for v in values]


def timing_report(record: MetricsRecord) -> str:
    """Per-algorithm wall-clock table (total and per-step mean, milliseconds)."""
    lines = [f"{'algorithm':<10} {'total_ms':>12} {'per_step_ms':>12}"]
    for algo in record.algorithms:
        total = record.timings_ms[algo]
        lines.append(f"{algo:<10} {total:>12.3f} {total / record.horizon:>12.3f}")
    return "\n".join(lines)
