"""Ground-truth trajectories: bicycle-model fleets and trace-file ingestion.

The fleet generator drives every vehicle with the bicycle kinematic model.
Controls combine a shared base command (speed and turn rate resampled every
``resample_every`` steps) with a per-vehicle slot-keeping correction that
steers each vehicle back toward its place in a staggered road formation,
plus a small per-vehicle jitter.  Purely independent random controls would
scatter the fleet far beyond communication range within seconds; the slot
correction keeps the network connected over arbitrary horizons while the
jitter still varies the topology.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, TraceFormatError

#: below this |turn rate| the straight-line limit of the step equations is used
_OMEGA_EPS = 1e-6

TRACE_HEADER = ("t", "vehicle_id", "x", "y")


@dataclass(frozen=True)
class KinematicState:
    x: float
    y: float
    theta: float  # heading, radians from +x axis
    speed: float  # m/s
    turn_rate: float  # rad/s


@dataclass(frozen=True)
class TrajectorySet:
    dt: float
    positions: np.ndarray  # (T, n, 2)
    vehicle_ids: tuple[int, ...]

    def __post_init__(self):
        if self.positions.ndim != 3 or self.positions.shape[2] != 2:
            raise InvalidInputError(f"positions must be (T, n, 2), got {self.positions.shape}")
        if not np.isfinite(self.positions).all():
            raise InvalidInputError("trajectory positions must be finite")
        if len(self.vehicle_ids) != self.positions.shape[1]:
            raise InvalidInputError("vehicle_ids length does not match positions")

    @property
    def horizon(self) -> int:
        return self.positions.shape[0]

    @property
    def n(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class ControlPolicy:
    """Fleet control parameters; defaults give urban-like curved convoys."""

    speed_range: tuple[float, float] = (5.0, 12.0)
    turn_range: tuple[float, float] = (-0.2, 0.2)
    resample_every: int = 50
    speed_jitter: float = 0.25
    turn_jitter: float = 0.01
    slot_gain: float = 0.8  # proportional pull toward the formation slot
    heading_gain: float = 1.5
    lane_width: float = 3.5
    row_spacing: float = 4.5
    lanes: int = 3
    origin: tuple[float, float] = (250.0, 150.0)


def bicycle_step(state: KinematicState, dt: float) -> KinematicState:
    """One step of the bicycle kinematic model.

    Uses the exact constant-turn-rate equations; for |turn_rate| below 1e-6
    rad/s the analytic straight-line limit is substituted to avoid the 1/omega
    singularity.
    """
    if dt <= 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    s, w, th = state.speed, state.turn_rate, state.theta
    if abs(w) < _OMEGA_EPS:
        x = state.x + s * dt * math.cos(th)
        y = state.y + s * dt * math.sin(th)
    else:
        x = state.x + (-s / w) * math.sin(th) + (s / w) * math.sin(th + w * dt)
        y = state.y + (s / w) * math.cos(th) - (s / w) * math.cos(th + w * dt)
    return KinematicState(x, y, th + w * dt, s, w)


def _formation_slots(n: int, policy: ControlPolicy) -> np.ndarray:
    """Staggered multi-lane offsets relative to the fleet reference point."""
    slots = np.zeros((n, 2))
    for i in range(n):
        row, lane = divmod(i, policy.lanes)
        stagger = 0.5 * policy.lane_width if row % 2 else 0.0
        slots[i] = (-policy.row_spacing * row, policy.lane_width * lane + stagger)
    return slots - slots.mean(axis=0)


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def generate_fleet(
    n: int,
    horizon: int,
    dt: float,
    policy: ControlPolicy | None,
    rng: np.random.Generator,
) -> TrajectorySet:
    """Generate n vehicle trajectories over ``horizon`` steps of length dt."""
    if n < 1 or horizon < 1:
        raise InvalidInputError("need n >= 1 and horizon >= 1")
    policy = policy or ControlPolicy()

    slots = _formation_slots(n, policy)
    ref = KinematicState(policy.origin[0], policy.origin[1], 0.0, 0.0, 0.0)
    states = [
        KinematicState(ref.x + slots[i, 0], ref.y + slots[i, 1], 0.0, 0.0, 0.0)
        for i in range(n)
    ]
    positions = np.zeros((horizon, n, 2))
    positions[0] = [(st.x, st.y) for st in states]

    base_speed = base_turn = 0.0
    speed_jit = np.zeros(n)
    turn_jit = np.zeros(n)
    for t in range(1, horizon):
        if (t - 1) % policy.resample_every == 0:
            base_speed = rng.uniform(*policy.speed_range)
            base_turn = rng.uniform(*policy.turn_range)
            speed_jit = rng.uniform(-policy.speed_jitter, policy.speed_jitter, n)
            turn_jit = rng.uniform(-policy.turn_jitter, policy.turn_jitter, n)
        ref = bicycle_step(
            KinematicState(ref.x, ref.y, ref.theta, base_speed, base_turn), dt
        )
        cos_r, sin_r = math.cos(ref.theta), math.sin(ref.theta)
        for i in range(n):
            sx = ref.x + cos_r * slots[i, 0] - sin_r * slots[i, 1]
            sy = ref.y + sin_r * slots[i, 0] + cos_r * slots[i, 1]
            st = states[i]
            ex, ey = sx - st.x, sy - st.y
            # project the slot error on the vehicle frame: along-track error
            # adjusts speed, cross-track plus heading error adjust the turn
            along = ex * math.cos(st.theta) + ey * math.sin(st.theta)
            cross = -ex * math.sin(st.theta) + ey * math.cos(st.theta)
            speed = max(0.0, base_speed + policy.slot_gain * along / max(dt, 1e-9) * dt + speed_jit[i])
            turn = (
                base_turn
                + policy.heading_gain * _wrap_angle(ref.theta - st.theta)
                + policy.slot_gain * cross / max(base_speed, 1.0)
                + turn_jit[i]
            )
            turn = float(np.clip(turn, -0.6, 0.6))
            states[i] = bicycle_step(KinematicState(st.x, st.y, st.theta, speed, turn), dt)
        positions[t] = [(st.x, st.y) for st in states]
    return TrajectorySet(dt, positions, tuple(range(n)))


def ingest_traces(path) -> TrajectorySet:
    """Read a ``t,vehicle_id,x,y`` CSV into a TrajectorySet.

    Every vehicle must appear exactly once at every timestamp; timestamps are
    regularized onto a uniform grid in ascending order.
    """
    rows: dict[float, dict[int, tuple[float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TraceFormatError("empty trace file")
        header = [h.strip() for h in header]
        for column in TRACE_HEADER:
            if column not in header:
                raise TraceFormatError(f"missing column {column!r}")
        idx = {name: header.index(name) for name in TRACE_HEADER}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise TraceFormatError("too few fields", line=lineno)
            try:
                t = float(row[idx["t"]])
                vid = int(row[idx["vehicle_id"]])
                x = float(row[idx["x"]])
                y = float(row[idx["y"]])
            except ValueError as exc:
                raise TraceFormatError(f"unparsable value ({exc})", line=lineno) from exc
            if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(y)):
                raise TraceFormatError("non-finite value", line=lineno)
            per_t = rows.setdefault(t, {})
            if vid in per_t:
                raise TraceFormatError(f"duplicate (t={t:g}, vehicle_id={vid}) row", line=lineno)
            per_t[vid] = (x, y)
    if not rows:
        raise TraceFormatError("trace file has no data rows")

    times = sorted(rows)
    ids = sorted(rows[times[0]])
    for t in times:
        if sorted(rows[t]) != ids:
            raise TraceFormatError(f"inconsistent vehicle set at t={t:g}")
    positions = np.array([[rows[t][vid] for vid in ids] for t in times])
    dt = (times[-1] - times[0]) / (len(times) - 1) if len(times) > 1 else 0.1
    if dt <= 0:
        raise TraceFormatError("timestamps are not strictly increasing")
    return TrajectorySet(dt, positions, tuple(ids))


def write_trace_csv(traj: TrajectorySet, path) -> int:
    """Write a TrajectorySet in the trace CSV schema; returns the row count."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for step in range(traj.horizon):
            t = step * traj.dt
            for j, vid in enumerate(traj.vehicle_ids):
                writer.writerow(
                    (
                        format(t, ".17g"),
                        vid,
                        format(traj.positions[step, j, 0], ".17g"),
                        format(traj.positions[step, j, 1], ".17g"),
                    )
                )
                count += 1
    return count
