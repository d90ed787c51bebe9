"""Deterministic random-stream derivation.

Every source of randomness in a scenario is drawn from its own generator,
keyed by the scenario seed plus a (purpose, time step, ...) tuple.  Streams
are therefore independent of iteration order and of which other streams are
consumed, which is what makes reruns bit-identical and sweeps comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    GPS = 1
    RANGE = 2
    AZIMUTH = 3
    CONTROL = 4
    DELAY = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``key`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class MeasurementStreams:
    """The three per-time-step generators used by measurement sampling."""

    gps: np.random.Generator
    range_: np.random.Generator
    azimuth: np.random.Generator


def measurement_streams(seed: int, time_step: int) -> MeasurementStreams:
    return MeasurementStreams(
        gps=substream(seed, Stream.GPS, time_step),
        range_=substream(seed, Stream.RANGE, time_step),
        azimuth=substream(seed, Stream.AZIMUTH, time_step),
    )
