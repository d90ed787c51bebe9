"""Centralized Laplacian localization: the global least-squares baseline.

Stacking the Laplacian over the identity anchors the otherwise singular
differential system with the GPS positions; each axis solves

    argmin_x || [L; I] x - [D delta; gps] ||

via an orthogonal-factorization least-squares routine.  The distributed
solvers are measured against this solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .graph import VanetGraph, extended_laplacian
from .sensing import DifferentialCoords, scaled_differentials


@dataclass(frozen=True)
class CllSolution:
    positions: np.ndarray  # (n, 2)
    residual_norm: np.ndarray  # (2,) per-axis least-squares residual


def cll_solve(graph: VanetGraph, diffs: DifferentialCoords, gps: np.ndarray) -> CllSolution:
    """Solve the anchored Laplacian system per axis."""
    gps = np.asarray(gps, dtype=float)
    n = graph.n
    if gps.shape != (n, 2):
        raise InvalidInputError(f"gps shape {gps.shape} does not match graph size {n}")
    if diffs.delta.shape != (n, 2):
        raise InvalidInputError(f"differentials shape {diffs.delta.shape} does not match graph size {n}")

    stacked = extended_laplacian(graph).matrix
    scaled = scaled_differentials(diffs, graph)
    positions = np.empty((n, 2))
    residual = np.empty(2)
    for axis in range(2):
        rhs = np.concatenate([scaled[:, axis], gps[:, axis]])
        solution, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
        positions[:, axis] = solution
        residual[axis] = float(np.linalg.norm(stacked @ solution - rhs))
    return CllSolution(positions, residual)


def lmse(estimates: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared position error (m^2) of an (n, 2) estimate matrix."""
    estimates = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimates.shape != truth.shape:
        raise InvalidInputError(f"shape mismatch: {estimates.shape} vs {truth.shape}")
    return float(np.mean(np.sum((estimates - truth) ** 2, axis=1)))


def solution_lmse(sol: CllSolution, truth: np.ndarray) -> float:
    return lmse(sol.positions, truth)
