"""Noisy multi-modal measurements and differential coordinates.

Each vehicle observes its own GPS position plus the distance and azimuth to
every neighbor.  Azimuth is the bearing from the +y axis, clockwise-positive
toward +x, so that for the true geometry

    x_l - x_i = d * sin(az)     and     y_l - y_i = d * cos(az).

Differential coordinates average the implied displacements over the
neighborhood; for noise-free inputs they satisfy L x = D delta_x exactly.

Range noise is drawn once per undirected edge and shared by both directed
observations of that edge (the reverse azimuth is the mirrored angle plus the
same noise).  The two directed measurements are therefore consistent, which
keeps the stacked differential system solvable by the distributed solvers;
marginally every measurement still carries Gaussian noise of the configured
sigma.  GPS noise is drawn per vehicle.  All draws come from per-(kind, time
step) streams indexed by vehicle/edge, so results do not depend on iteration
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .graph import VanetGraph
from .rng import MeasurementStreams


@dataclass(frozen=True)
class NoiseConfig:
    """Standard deviations of the measurement noises (azimuth in radians)."""

    sigma_x: float = 3.0
    sigma_y: float = 2.5
    sigma_d: float = 1.0
    sigma_az: float = math.radians(4.0)

    def __post_init__(self):
        for name in ("sigma_x", "sigma_y", "sigma_d", "sigma_az"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")

    @classmethod
    def from_degrees(
        cls, sigma_x: float = 3.0, sigma_y: float = 2.5, sigma_d: float = 1.0,
        sigma_az_deg: float = 4.0,
    ) -> "NoiseConfig":
        return cls(sigma_x, sigma_y, sigma_d, math.radians(sigma_az_deg))


@dataclass(frozen=True)
class MeasurementSet:
    """One time step of noisy observations.

    ``range_`` and ``azimuth`` are (n, n) arrays holding the directed
    observation of vehicle i about neighbor l at [i, l]; entries off the
    graph edges are NaN.  ``pairs`` lists the directed (i, l) relations.
    """

    gps: np.ndarray  # (n, 2)
    range_: np.ndarray  # (n, n), >= 0 where defined
    azimuth: np.ndarray  # (n, n) radians
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class DifferentialCoords:
    """Per-vehicle neighborhood-averaged displacements (meters)."""

    delta: np.ndarray  # (n, 2)
    valid: np.ndarray  # (n,) bool, False for isolated vehicles


def true_range(p_i, p_l) -> tuple[float, float]:
    """Distance and azimuth from p_i to p_l; errors on coincident points."""
    p_i = np.asarray(p_i, dtype=float)
    p_l = np.asarray(p_l, dtype=float)
    dx = float(p_l[0] - p_i[0])
    dy = float(p_l[1] - p_i[1])
    distance = math.hypot(dx, dy)
    if distance == 0.0:
        raise InvalidInputError("coincident points have no defined azimuth")
    return distance, math.atan2(dx, dy)


def sample_measurements(
    positions: np.ndarray,
    graph: VanetGraph,
    noise: NoiseConfig,
    streams: MeasurementStreams,
) -> MeasurementSet:
    """Draw one time step of noisy GPS / distance / azimuth observations."""
    positions = np.asarray(positions, dtype=float)
    n = graph.n
    if positions.shape != (n, 2):
        raise InvalidInputError(f"positions {positions.shape} do not match graph size {n}")

    gps = positions + streams.gps.standard_normal((n, 2)) * np.array([noise.sigma_x, noise.sigma_y])

    # one noise draw per undirected edge slot, shared by both directions
    d_noise = streams.range_.standard_normal((n, n)) * noise.sigma_d
    az_noise = streams.azimuth.standard_normal((n, n)) * noise.sigma_az

    range_ = np.full((n, n), np.nan)
    azimuth = np.full((n, n), np.nan)
    pairs: list[tuple[int, int]] = []
    for i in range(n):
        for l in graph.neighbors_of(i):
            lo, hi = (i, l) if i < l else (l, i)
            dist, az = true_range(positions[i], positions[l])
            range_[i, l] = max(0.0, dist + d_noise[lo, hi])
            azimuth[i, l] = az + az_noise[lo, hi]
            pairs.append((i, l))
    return MeasurementSet(gps, range_, azimuth, tuple(pairs))


def differential_coords(ms: MeasurementSet, graph: VanetGraph) -> DifferentialCoords:
    """Average measured displacements per vehicle; isolated vehicles are flagged."""
    n = graph.n
    delta = np.zeros((n, 2))
    valid = np.zeros(n, dtype=bool)
    for i in range(n):
        neighbors = graph.neighbors_of(i)
        if not neighbors:
            continue
        valid[i] = True
        for l in neighbors:
            zd = ms.range_[i, l]
            zaz = ms.azimuth[i, l]
            delta[i, 0] += -zd * math.sin(zaz)
            delta[i, 1] += -zd * math.cos(zaz)
        delta[i] /= len(neighbors)
    return DifferentialCoords(delta, valid)


def scaled_differentials(diffs: DifferentialCoords, graph: VanetGraph) -> np.ndarray:
    """Degree-scaled differentials D @ delta, the right-hand side of L x = D delta.

    This is the measurement each vehicle pairs with its Laplacian row: row i of
    L applied to the true positions equals degrees[i] * delta[i] when the
    measurements are noise-free.
    """
    return graph.degrees[:, None] * diffs.delta
