"""Time-varying vehicle network graph and its operators.

Edges connect vehicles within communication range, pruned so nobody keeps
more than ``max_neighbors`` links; pruning is mutual (an edge survives only
if both endpoints keep it), which keeps the adjacency symmetric.  From the
graph we derive the Laplacian, the anchor-extended Laplacian and the
Metropolis combination weights used by all solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

#: eigenvalues closer to zero than this are treated as the trivial one
_ZERO_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class GraphConfig:
    comm_range: float = 20.0
    max_neighbors: int = 6

    def __post_init__(self):
        if not (self.comm_range > 0):
            raise InvalidInputError(f"comm_range must be > 0, got {self.comm_range}")
        if self.max_neighbors < 1:
            raise InvalidInputError(f"max_neighbors must be >= 1, got {self.max_neighbors}")


@dataclass(frozen=True)
class VanetGraph:
    """Undirected vehicle graph snapshot.

    ``neighborhoods[i]`` lists vehicle i itself plus its neighbors (sorted),
    so ``len(neighborhoods[i]) == degrees[i] + 1``.
    """

    adjacency: np.ndarray  # (n, n) symmetric 0/1, zero diagonal
    degrees: np.ndarray  # (n,) neighbor counts, self excluded
    laplacian: np.ndarray  # (n, n) degree matrix minus adjacency
    neighborhoods: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degree_matrix(self) -> np.ndarray:
        return np.diag(self.degrees)

    def neighbors_of(self, i: int) -> tuple[int, ...]:
        """Neighbors of vehicle i, self excluded."""
        return tuple(l for l in self.neighborhoods[i] if l != i)


@dataclass(frozen=True)
class ExtendedLaplacian:
    """Laplacian stacked over the identity; full column rank for any n >= 1."""

    matrix: np.ndarray  # (2n, n)


@dataclass(frozen=True)
class CombinationMatrix:
    """Row-stochastic neighbor weights; symmetric (doubly stochastic) under Metropolis."""

    weights: np.ndarray  # (n, n), zero outside neighborhoods


def build_graph(positions: np.ndarray, cfg: GraphConfig) -> VanetGraph:
    """Connect vehicles within ``cfg.comm_range``, then prune to mutual nearest.

    Each vehicle ranks its in-range candidates by (distance, vehicle id) and
    keeps the first ``cfg.max_neighbors``; an edge survives only if both
    endpoints kept it.  Isolated vehicles are legal and get degree 0.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise InvalidInputError(f"positions must be (n, 2), got {positions.shape}")
    if not np.isfinite(positions).all():
        raise InvalidInputError("positions must be finite")
    n = positions.shape[0]

    dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
    kept: list[set[int]] = []
    for i in range(n):
        candidates = sorted(
            (dist[i, l], l) for l in range(n) if l != i and dist[i, l] <= cfg.comm_range
        )
        kept.append({l for _, l in candidates[: cfg.max_neighbors]})

    adjacency = np.zeros((n, n))
    for i in range(n):
        for l in kept[i]:
            if i in kept[l]:
                adjacency[i, l] = 1.0
    degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency
    neighborhoods = tuple(
        tuple(sorted([i] + [l for l in range(n) if adjacency[i, l]])) for i in range(n)
    )
    return VanetGraph(adjacency, degrees, laplacian, neighborhoods)


def laplacian(g: VanetGraph) -> np.ndarray:
    return g.laplacian


def extended_laplacian(g: VanetGraph) -> ExtendedLaplacian:
    return ExtendedLaplacian(np.vstack([g.laplacian, np.eye(g.n)]))


def metropolis_weights(g: VanetGraph) -> CombinationMatrix:
    """Metropolis rule: off-diagonal 1 / max(|N_i|, |N_l|), diagonal the complement.

    Neighborhood sizes count self, so the weight between i and l is
    1 / (1 + max(d_i, d_l)).  Rows and columns both sum to one.
    """
    n = g.n
    sizes = g.degrees + 1.0
    weights = np.zeros((n, n))
    for i in range(n):
        for l in g.neighbors_of(i):
            weights[i, l] = 1.0 / max(sizes[i], sizes[l])
        weights[i, i] = 1.0 - weights[i].sum()
    return CombinationMatrix(weights)


def algebraic_connectivity(g: VanetGraph) -> float:
    """Second-smallest Laplacian eigenvalue; positive iff the graph is connected."""
    if g.n < 2:
        raise InvalidInputError("algebraic connectivity needs at least 2 vehicles")
    eigenvalues = np.linalg.eigvalsh(g.laplacian)
    lam2 = float(eigenvalues[1])
    if abs(lam2) < _ZERO_EIGENVALUE_TOL:
        return 0.0
    return lam2
