"""Distributed adapt-then-combine localization solvers.

Three algorithms share the same skeleton: every vehicle holds an estimate of
the whole fleet's position vector, refines it locally against Laplacian-row
measurements (adapt), then convexly combines its neighbors' intermediate
estimates (combine).

* ``gllms_iterate``  - each vehicle adapts with its own (differential,
  Laplacian-row) pair only.
* ``gllme_iterate``  - neighbors additionally exchange their measurement
  pairs, so the adapt step aggregates the whole neighborhood.
* ``glcg_iterate``   - the neighborhood pairs are assembled into a local
  normal-equation system solved by a conjugate-gradient recursion with a
  forgetting factor.

The adapt step uses the sign that performs gradient descent,
``psi = w + mu * u^T (d - u w)``; written with the opposite sign the
recursion is gradient ascent and diverges.

Network delay is modeled per the combine step: an agent may read its
neighbors' intermediate vectors several iterations late.  Lags before the
first iteration resolve to the initialization vector, and a vehicle's own
intermediate vector is never delayed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .graph import CombinationMatrix, VanetGraph
from .sensing import DifferentialCoords, scaled_differentials

#: step sizes are capped here; larger values slow convergence down
MAX_STEP_SIZE = 0.1

#: Tikhonov term added to each local normal-equation matrix
CG_REGULARIZATION = 1e-7

#: default forgetting factor of the conjugate-gradient recursion
CG_FORGETTING = 0.2

#: curvature below this is treated as degenerate and restarts the direction
CG_RESTART_TOL = 1e-14


@dataclass
class CgState:
    """Per-agent conjugate-gradient internals (x and y axes side by side)."""

    A: np.ndarray  # (n, n) regularized normal matrix, symmetric
    b: np.ndarray  # (n, 2) right-hand side per axis
    g: np.ndarray  # (n, 2) negative gradient
    r: np.ndarray  # (n, 2) direction


@dataclass
class AgentState:
    """One vehicle's solver state."""

    id: int
    w: np.ndarray  # (n, 2) estimate of every vehicle's position
    psi: np.ndarray  # (n, 2) last intermediate estimate
    psi_history: deque = field(default_factory=lambda: deque(maxlen=1))
    cg: CgState | None = None


@dataclass(frozen=True)
class StepSizes:
    mu1: np.ndarray  # (n,) per-vehicle, 0 marks an isolated vehicle
    mu2: np.ndarray


@dataclass(frozen=True)
class DelayPolicy:
    """How combine-step inputs are delayed.

    ``random_set``: per vehicle and iteration, with probability
    ``probability`` a lag drawn uniformly from ``tau_values`` applies to all
    received vectors (probability 1.0 means every value is equally likely at
    every iteration).  ``fixed_fraction``: a fixed random subset of each
    vehicle's neighbors, of relative size ``fraction``, is always received
    ``max(tau_values)`` iterations late.
    """

    mode: str = "none"
    tau_values: tuple[int, ...] = (1, 2, 3, 4)
    probability: float = 1.0
    fraction: float = 0.8

    def __post_init__(self):
        if self.mode not in ("none", "random_set", "fixed_fraction"):
            raise InvalidInputError(f"unknown delay mode {self.mode!r}")
        if self.mode != "none":
            if not self.tau_values or any(t < 1 for t in self.tau_values):
                raise InvalidInputError("tau_values must be positive integers")
        if not 0.0 <= self.probability <= 1.0:
            raise InvalidInputError("probability must be in [0, 1]")
        if not 0.0 <= self.fraction <= 1.0:
            raise InvalidInputError("fraction must be in [0, 1]")

    @property
    def max_lag(self) -> int:
        return max(self.tau_values) if self.mode != "none" else 0

    def realize(
        self, iterations: int, graph: VanetGraph, rng: np.random.Generator | None
    ) -> np.ndarray | None:
        """Draw the (iterations, n, n) lag table; ``None`` when mode is none.

        ``lags[k, i, l]`` is how many iterations old the vector of source l
        is when agent i combines at iteration k.  Diagonals stay 0.
        """
        if self.mode == "none":
            return None
        if rng is None:
            raise InvalidInputError(f"delay mode {self.mode!r} needs an rng")
        n = graph.n
        lags = np.zeros((iterations, n, n), dtype=np.int64)
        if self.mode == "random_set":
            taus = np.asarray(self.tau_values)
            applied = rng.random((iterations, n)) < self.probability
            choice = taus[rng.integers(0, len(taus), size=(iterations, n))]
            per_agent = np.where(applied, choice, 0)
            lags[:] = per_agent[:, :, None]
        else:  # fixed_fraction
            tau = max(self.tau_values)
            for i in range(n):
                neighbors = list(graph.neighbors_of(i))
                count = round(self.fraction * len(neighbors))
                if count:
                    delayed = rng.choice(len(neighbors), size=count, replace=False)
                    for j in delayed:
                        lags[:, i, neighbors[j]] = tau
        lags[:, np.arange(n), np.arange(n)] = 0
        return lags


@dataclass(frozen=True)
class InitPolicy:
    mode: str = "coherent"
    threshold: float = 0.8

    def __post_init__(self):
        if self.mode not in ("gps", "coherent"):
            raise InvalidInputError(f"unknown init mode {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidInputError("threshold must be in [0, 1]")


def step_size_gllms(graph: VanetGraph, i: int) -> float:
    """min(0.1, 2 / (d_i^2 + d_i)) from the rank-one covariance spectrum."""
    d = float(graph.degrees[i])
    if d < 1:
        raise InvalidInputError(f"vehicle {i} is isolated; adaptation must be skipped")
    return min(MAX_STEP_SIZE, 2.0 / (d * d + d))


def step_size_gllme(
    graph: VanetGraph, C: CombinationMatrix, i: int, rule: str = "eigen"
) -> float:
    """Step bound from the neighborhood-aggregated covariance.

    ``rule='eigen'`` caps 2 / lambda_max(sum_l c_il L_l^T L_l) at 0.1;
    ``rule='sufficient'`` returns the looser closed-form bound
    2 / max_l (d_l^2 + d_l), useful for comparison runs.
    """
    if graph.degrees[i] < 1:
        raise InvalidInputError(f"vehicle {i} is isolated; adaptation must be skipped")
    if rule == "sufficient":
        worst = max((graph.degrees[l]) ** 2 + graph.degrees[l] for l in graph.neighborhoods[i])
        return min(MAX_STEP_SIZE, 2.0 / worst)
    if rule != "eigen":
        raise InvalidInputError(f"unknown step-size rule {rule!r}")
    L = graph.laplacian
    weights = C.weights[i]
    S = np.einsum("l,lj,lk->jk", weights, L, L)
    lam_max = float(np.linalg.eigvalsh(S)[-1])
    if lam_max <= 0:
        raise InvalidInputError(f"vehicle {i} has a degenerate covariance")
    return min(MAX_STEP_SIZE, 2.0 / lam_max)


def compute_step_sizes(graph: VanetGraph, C: CombinationMatrix) -> StepSizes:
    """Per-vehicle step sizes; isolated vehicles get 0 (their adapt is a no-op)."""
    n = graph.n
    mu1 = np.zeros(n)
    mu2 = np.zeros(n)
    for i in range(n):
        if graph.degrees[i] >= 1:
            mu1[i] = step_size_gllms(graph, i)
            mu2[i] = step_size_gllme(graph, C, i)
    return StepSizes(mu1, mu2)


def make_agents(graph: VanetGraph, initial: np.ndarray, max_lag: int = 0) -> list[AgentState]:
    """Create one AgentState per vehicle from stacked (n, n, 2) initial estimates."""
    initial = np.asarray(initial, dtype=float)
    n = graph.n
    if initial.shape != (n, n, 2):
        raise InvalidInputError(f"initial estimates must be (n, n, 2), got {initial.shape}")
    return [
        AgentState(
            id=i,
            w=initial[i].copy(),
            psi=initial[i].copy(),
            psi_history=deque(maxlen=max_lag + 1),
        )
        for i in range(n)
    ]


def coherent_init(
    agent,
    graph: VanetGraph,
    gps: np.ndarray,
    prev_solution: np.ndarray | None,
    policy: InitPolicy,
) -> np.ndarray:
    """Warm-start one agent's estimate matrix.

    Self and non-neighbors always start at the current GPS fix.  Neighbor
    entries come from the agent's previous solution: all of them when the
    neighborhood is a small fraction of the fleet, otherwise only the first
    ceil(half) by ascending vehicle id, the remainder staying at GPS.
    """
    i = agent.id if isinstance(agent, AgentState) else int(agent)
    gps = np.asarray(gps, dtype=float)
    w = gps.copy()
    if policy.mode == "gps" or prev_solution is None:
        return w
    neighbors = graph.neighbors_of(i)  # ascending ids
    if (len(neighbors) + 1) / graph.n < policy.threshold:
        chosen = neighbors
    else:
        chosen = neighbors[: math.ceil(len(neighbors) / 2)]
    for l in chosen:
        w[l] = prev_solution[l]
    return w


def initial_estimates(
    graph: VanetGraph,
    gps: np.ndarray,
    prev_solutions: list[np.ndarray] | None,
    policy: InitPolicy,
) -> np.ndarray:
    """Stacked (n, n, 2) initializations for the whole fleet."""
    n = graph.n
    out = np.empty((n, n, 2))
    for i in range(n):
        prev = None if prev_solutions is None else prev_solutions[i]
        out[i] = coherent_init(i, graph, gps, prev, policy)
    return out


def reset_on_membership_change(prev_ids, curr_ids) -> bool:
    """True when the vehicle set changed, forcing GPS re-initialization."""
    return set(prev_ids) != set(curr_ids)


# ---------------------------------------------------------------------------
# iteration engine
# ---------------------------------------------------------------------------


class _PsiBuffer:
    """Intermediate-vector history with the initialization vector pinned.

    Lags that index before the first iteration resolve to the initialization.
    """

    def __init__(self, init_stack: np.ndarray, max_lag: int):
        self._init = init_stack.copy()
        self._buf: deque[np.ndarray] = deque(maxlen=max(1, max_lag))
        self._count = 0  # iterations recorded

    def push(self, psi: np.ndarray) -> None:
        if self._buf.maxlen:
            self._buf.append(psi.copy())
        self._count += 1

    def lookup(self, lag: int, current: np.ndarray) -> np.ndarray:
        """Stack as seen ``lag`` iterations before the current one."""
        if lag <= 0:
            return current
        if lag > self._count:
            return self._init
        return self._buf[-lag]

    def tail(self) -> list[np.ndarray]:
        return list(self._buf)


def _combine(
    C: np.ndarray,
    psi: np.ndarray,
    lags_k: np.ndarray | None,
    buffer: _PsiBuffer,
) -> np.ndarray:
    if lags_k is None or not lags_k.any():
        return np.einsum("il,lja->ija", C, psi)
    n = psi.shape[0]
    out = np.zeros_like(psi)
    for i in range(n):
        row = C[i]
        for tau in np.unique(lags_k[i]):
            source = buffer.lookup(int(tau), psi)
            mask = (lags_k[i] == tau) & (row != 0)
            if mask.any():
                out[i] += np.einsum("l,lja->ja", row * mask, source)
    return out


def _check_finite(W: np.ndarray, algorithm: str, time_step: int, iteration: int) -> None:
    finite = np.isfinite(W.reshape(W.shape[0], -1)).all(axis=1)
    if not finite.all():
        vehicle = int(np.flatnonzero(~finite)[0])
        raise DivergenceError(algorithm, vehicle, time_step, iteration)


def _stack(agents: list[AgentState]) -> np.ndarray:
    return np.stack([a.w for a in agents])


def _writeback(
    agents: list[AgentState], W: np.ndarray, psi: np.ndarray, buffer: _PsiBuffer
) -> list[AgentState]:
    history = buffer.tail() + [psi]
    for i, agent in enumerate(agents):
        agent.w = W[i].copy()
        agent.psi = psi[i].copy()
        agent.psi_history.clear()
        for stack in history[-(agent.psi_history.maxlen or 1):]:
            agent.psi_history.append(stack[i].copy())
    return agents


def _prepare(agents, graph, C, diffs, delay, rng, iterations):
    n = graph.n
    if len(agents) != n:
        raise InvalidInputError(f"{len(agents)} agents for a graph of {n} vehicles")
    if iterations < 1:
        raise InvalidInputError("iterations must be >= 1")
    measurements = scaled_differentials(diffs, graph)  # (n, 2)
    lags = (delay or DelayPolicy()).realize(iterations, graph, rng)
    W = _stack(agents)
    buffer = _PsiBuffer(W, (delay.max_lag if delay else 0))
    return measurements, lags, W, buffer


def gllms_iterate(
    agents: list[AgentState],
    graph: VanetGraph,
    C: CombinationMatrix,
    diffs: DifferentialCoords,
    iterations: int,
    delay: DelayPolicy | None = None,
    rng: np.random.Generator | None = None,
    on_iteration=None,
    time_step: int = 0,
) -> list[AgentState]:
    """Run adapt-then-combine LMS where each agent uses only its own pair."""
    m, lags, W, buffer = _prepare(agents, graph, C, diffs, delay, rng, iterations)
    L = graph.laplacian
    mu = compute_step_sizes(graph, C).mu1
    weights = C.weights
    for k in range(1, iterations + 1):
        error = m - np.einsum("ij,ija->ia", L, W)  # residual of each agent's own row
        psi = W + mu[:, None, None] * L[:, :, None] * error[:, None, :]
        W = _combine(weights, psi, None if lags is None else lags[k - 1], buffer)
        buffer.push(psi)
        _check_finite(W, "gllms", time_step, k)
        if on_iteration is not None:
            on_iteration(k, W)
    return _writeback(agents, W, psi, buffer)


def gllme_iterate(
    agents: list[AgentState],
    graph: VanetGraph,
    C: CombinationMatrix,
    diffs: DifferentialCoords,
    iterations: int,
    delay: DelayPolicy | None = None,
    rng: np.random.Generator | None = None,
    on_iteration=None,
    time_step: int = 0,
) -> list[AgentState]:
    """Adapt-then-combine LMS with measurement exchanges.

    Each agent's adapt step aggregates the (differential, Laplacian-row)
    pairs of its whole neighborhood, weighted by the combination matrix.
    """
    m, lags, W, buffer = _prepare(agents, graph, C, diffs, delay, rng, iterations)
    L = graph.laplacian
    mu = compute_step_sizes(graph, C).mu2
    weights = C.weights
    for k in range(1, iterations + 1):
        psi = np.empty_like(W)
        for axis in range(2):
            Wa = W[:, :, axis]
            residual = m[:, axis][None, :] - Wa @ L.T  # [i, l] = m_l - L_l w_i
            psi[:, :, axis] = Wa + mu[:, None] * ((weights * residual) @ L)
        W = _combine(weights, psi, None if lags is None else lags[k - 1], buffer)
        buffer.push(psi)
        _check_finite(W, "gllme", time_step, k)
        if on_iteration is not None:
            on_iteration(k, W)
    return _writeback(agents, W, psi, buffer)


def _assemble_local_systems(graph: VanetGraph, m: np.ndarray):
    """Per-agent U_i (own row first, then neighbors ascending) and q_i,
    reduced to A_i = U^T U + reg*I and b_i = U^T q."""
    n = graph.n
    L = graph.laplacian
    A = np.empty((n, n, n))
    b = np.empty((n, n, 2))
    eye = CG_REGULARIZATION * np.eye(n)
    for i in range(n):
        members = [i] + list(graph.neighbors_of(i))
        U = L[members]
        A[i] = U.T @ U + eye
        b[i] = U.T @ m[members]
    return A, b


def cg_step(
    A: np.ndarray,
    b: np.ndarray,
    W: np.ndarray,
    g: np.ndarray,
    r: np.ndarray,
    forgetting: float = CG_FORGETTING,
    update: str = "standard",
):
    """One conjugate-gradient recursion across stacked agents.

    Shapes: A (m, n, n), b/W/g/r (m, n, 2).  Returns (psi, g_next, r_next).
    A unit system (A = I, b arbitrary, W = 0) reaches b in a single step.
    """
    Ar = np.einsum("ijk,ika->ija", A, r)
    rAr = np.einsum("ija,ija->ia", r, Ar)
    rr = np.einsum("ija,ija->ia", r, r)
    rg = np.einsum("ija,ija->ia", r, g)
    g_norm = np.sqrt(np.einsum("ija,ija->ia", g, g))
    w_norm = np.sqrt(np.einsum("ija,ija->ia", W, W))
    degenerate = rAr <= np.maximum(10.0 * CG_REGULARIZATION * rr, CG_RESTART_TOL)
    settled = g_norm <= 10.0 * CG_REGULARIZATION * (1.0 + w_norm)
    skip = degenerate | settled
    alpha = np.where(skip, 0.0, rg / np.where(skip, 1.0, rAr))

    psi = W + alpha[:, None, :] * r
    g_tilde = forgetting * g + b - np.einsum("ijk,ika->ija", A, W)
    if update == "paper":
        g_next = g_tilde + alpha[:, None, :] * r
    else:
        g_next = g_tilde - alpha[:, None, :] * Ar

    pr = np.einsum("ija,ija->ia", g_next - g, g_next)
    gg_next = np.einsum("ija,ija->ia", g_next, g_next)
    gg = np.einsum("ija,ija->ia", g, g)
    fr = gg_next / np.where(gg > 0, gg, 1.0)
    beta = np.maximum(0.0, np.minimum(pr / np.where(gg_next > 0, gg_next, 1.0), fr))
    r_next = np.where(skip[:, None, :], g_next, g_next + beta[:, None, :] * r)
    return psi, g_next, r_next


def glcg_iterate(
    agents: list[AgentState],
    graph: VanetGraph,
    C: CombinationMatrix,
    diffs: DifferentialCoords,
    iterations: int,
    forgetting: float = CG_FORGETTING,
    delay: DelayPolicy | None = None,
    rng: np.random.Generator | None = None,
    update: str = "standard",
    on_iteration=None,
    time_step: int = 0,
) -> list[AgentState]:
    """Adapt-then-combine conjugate gradient on the local neighborhood systems.

    ``update`` selects the gradient recursion: ``standard`` applies the
    residual correction ``g <- g~ - alpha A r``; ``paper`` applies
    ``g <- g~ + alpha r`` verbatim from the source material (it does not
    converge and is kept for comparison only).

    Safeguards, applied per agent and axis:
    * degenerate curvature (r^T A r below CG_RESTART_TOL, or carried almost
      entirely by the regularization term) skips the step and restarts the
      direction at the gradient;
    * once the residual falls to the regularization ghost level
      (10 * reg * (1 + ||w||)) the agent stops stepping and only combines,
      which lets the network settle into exact consensus instead of chasing
      the zero-information directions of its rank-deficient local system;
    * the direction weight is clamped at zero (Polak-Ribiere-plus convention)
      so a sharp gradient drop cannot blow up the direction vector.
    """
    if update not in ("standard", "paper"):
        raise InvalidInputError(f"unknown cg update variant {update!r}")
    if not 0.0 < forgetting < 1.0:
        raise InvalidInputError("forgetting factor must be in (0, 1)")
    m, lags, W, buffer = _prepare(agents, graph, C, diffs, delay, rng, iterations)
    weights = C.weights
    A, b = _assemble_local_systems(graph, m)

    g = b - np.einsum("ijk,ika->ija", A, W)
    r = g.copy()
    for k in range(1, iterations + 1):
        psi, g, r = cg_step(A, b, W, g, r, forgetting=forgetting, update=update)
        W = _combine(weights, psi, None if lags is None else lags[k - 1], buffer)
        buffer.push(psi)
        _check_finite(W, "glcg", time_step, k)
        if on_iteration is not None:
            on_iteration(k, W)

    agents = _writeback(agents, W, psi, buffer)
    for i, agent in enumerate(agents):
        agent.cg = CgState(A=A[i].copy(), b=b[i].copy(), g=g[i].copy(), r=r[i].copy())
    return agents
