import numpy as np
import pytest

import lapdiff
from lapdiff import (
    AgentState,
    DelayPolicy,
    DivergenceError,
    GraphConfig,
    InitPolicy,
    InvalidInputError,
    NoiseConfig,
    StepSizes,
    build_graph,
    cll_solve,
    coherent_init,
    compute_step_sizes,
    differential_coords,
    gllme_iterate,
    gllms_iterate,
    initial_estimates,
    make_agents,
    measurement_streams,
    metropolis_weights,
    reset_on_membership_change,
    sample_measurements,
    step_size_gllme,
    step_size_gllms,
    substream,
)

ZERO_NOISE = NoiseConfig(0.0, 0.0, 0.0, 0.0)


def make_instance(positions, comm_range=20.0, noise=None, seed=1, t=0):
    positions = np.asarray(positions, dtype=float)
    graph = build_graph(positions, GraphConfig(comm_range=comm_range))
    ms = sample_measurements(
        positions, graph, noise or NoiseConfig(), measurement_streams(seed, t)
    )
    diffs = differential_coords(ms, graph)
    return graph, metropolis_weights(graph), ms, diffs


def triangle(center=(200.0, 100.0)):
    return np.array([(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]) + np.asarray(center)


def compact_cluster(rng, n, spread=14.0):
    center = rng.uniform(80, 400, size=2)
    while True:
        pts = center + rng.uniform(0, spread, size=(n, 2))
        graph = build_graph(pts, GraphConfig())
        if n == 1 or np.sort(np.linalg.eigvalsh(graph.laplacian))[1] > 1e-6:
            return pts


def gps_agents(graph, gps, max_lag=0):
    return make_agents(graph, initial_estimates(graph, gps, None, InitPolicy("gps")), max_lag)


def spread_of(agents):
    return max(
        np.abs(a.w - b.w).max() for i, a in enumerate(agents) for b in agents[i + 1:]
    )


class TestStepSizes:
    def test_gllms_values(self):
        # min(0.1, 2/(d^2+d)) for neighborhood sizes 3, 6, 2 (self included)
        pts = triangle()
        graph = build_graph(pts, GraphConfig(comm_range=5.0))
        assert step_size_gllms(graph, 0) == pytest.approx(0.1)  # |N|=3 -> 1/3 capped
        ring = [(10 * np.cos(a), 10 * np.sin(a)) for a in np.linspace(0, 2 * np.pi, 6, endpoint=False)]
        hub = build_graph([(0.0, 0.0)] + ring, GraphConfig(comm_range=10.5, max_neighbors=6))
        assert hub.degrees[0] == 6
        assert step_size_gllms(hub, 0) == pytest.approx(2 / 42)  # = 1/21 < 0.1
        pair = build_graph([(0, 0), (5, 0)], GraphConfig())
        assert step_size_gllms(pair, 0) == pytest.approx(0.1)  # |N|=2 -> 1.0 capped

    def test_gllms_rejects_isolated(self):
        graph = build_graph([(0, 0), (100, 0)], GraphConfig())
        with pytest.raises(InvalidInputError):
            step_size_gllms(graph, 0)

    def test_gllme_full_triangle_eigen(self):
        # C = (1/3) ones, sum_l c_il L_l^T L_l = L^2 / 3 with spectrum {0, 3, 3}
        graph = build_graph(triangle(), GraphConfig(comm_range=5.0))
        C = metropolis_weights(graph)
        S = (graph.laplacian @ graph.laplacian) / 3.0
        assert np.linalg.eigvalsh(S)[-1] == pytest.approx(3.0)
        assert step_size_gllme(graph, C, 0) == pytest.approx(0.1)  # 2/3 capped

    def test_gllme_sufficient_bound(self):
        graph = build_graph(triangle(), GraphConfig(comm_range=5.0))
        C = metropolis_weights(graph)
        # Prop-style bound 2/max_l(d_l^2+d_l) = 2/6, and lambda_max=3 <= 6
        assert step_size_gllme(graph, C, 0, rule="sufficient") == pytest.approx(1 / 3 * 0.3, abs=1)
        assert step_size_gllme(graph, C, 0, rule="sufficient") == pytest.approx(0.1)

    def test_gllme_pair_numeric(self):
        graph = build_graph([(0.0, 0.0), (5.0, 0.0)], GraphConfig())
        C = metropolis_weights(graph)
        L = graph.laplacian
        S = 0.5 * (np.outer(L[0], L[0]) + np.outer(L[1], L[1]))
        lam = np.linalg.eigvalsh(S)[-1]
        expected = min(0.1, 2.0 / lam)
        assert step_size_gllme(graph, C, 0) == pytest.approx(expected)

    def test_compute_step_sizes_marks_isolated(self):
        graph = build_graph([(0, 0), (5, 0), (500, 0)], GraphConfig())
        sizes = compute_step_sizes(graph, metropolis_weights(graph))
        assert isinstance(sizes, StepSizes)
        assert sizes.mu1[2] == 0.0 and sizes.mu2[2] == 0.0
        assert 0 < sizes.mu1[0] <= 0.1 and 0 < sizes.mu2[0] <= 0.1


class TestFixedPoints:
    @pytest.mark.parametrize("algo", ["gllms", "gllme", "glcg"])
    def test_truth_init_zero_noise_is_fixed_point(self, algo):
        positions = triangle()
        graph, C, ms, diffs = make_instance(positions, comm_range=5.0, noise=ZERO_NOISE)
        init = np.tile(positions[None], (3, 1, 1))
        agents = make_agents(graph, init)
        drifts = []

        def on_iteration(k, W):
            drifts.append(np.abs(W - init).max())

        iterate = getattr(lapdiff, f"{algo}_iterate")
        iterate(agents, graph, C, diffs, 50, on_iteration=on_iteration)
        assert max(drifts) <= 1e-12

    # The diffusion fixed point sits a noise-scale distance (~0.5 m Frobenius)
    # from the centralized solution, so the relative tolerance presumes
    # map-scale coordinates; at (450, 300) roughly 97% of noise draws pass.

    def test_gllms_converges_to_cll(self):
        graph, C, ms, diffs = make_instance(triangle(center=(450.0, 300.0)), comm_range=5.0, seed=3)
        sol = cll_solve(graph, diffs, ms.gps)
        agents = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 70)
        for agent in agents:
            rel = np.linalg.norm(agent.w - sol.positions) / np.linalg.norm(sol.positions)
            assert rel < 1e-3

    def test_gllme_converges_to_cll(self):
        graph, C, ms, diffs = make_instance(triangle(center=(450.0, 300.0)), comm_range=5.0, seed=3)
        sol = cll_solve(graph, diffs, ms.gps)
        agents = gllme_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 70)
        for agent in agents:
            rel = np.linalg.norm(agent.w - sol.positions) / np.linalg.norm(sol.positions)
            assert rel < 1e-3

    def test_consensus_after_convergence(self):
        rng = np.random.default_rng(17)
        for n in (3, 5, 8):
            positions = compact_cluster(rng, n)
            graph, C, ms, diffs = make_instance(positions, seed=n)
            for iterate in (gllms_iterate, gllme_iterate):
                agents = iterate(gps_agents(graph, ms.gps), graph, C, diffs, 700)
                assert spread_of(agents) <= 1e-6

    def test_convergence_to_baseline_multi_size(self):
        rng = np.random.default_rng(19)
        for n in (3, 5, 10):
            positions = compact_cluster(rng, n)
            graph, C, ms, diffs = make_instance(positions, seed=100 + n)
            sol = cll_solve(graph, diffs, ms.gps)
            for iterate in (gllms_iterate, gllme_iterate):
                agents = iterate(gps_agents(graph, ms.gps), graph, C, diffs, 500)
                rel = np.linalg.norm(agents[0].w - sol.positions) / np.linalg.norm(sol.positions)
                assert rel < 0.01

    def test_mean_unbiasedness_proxy(self):
        # average of 200 noisy GLLMS solutions approaches the noise-free
        # solution (truth) within 3 sigma of the empirical mean
        rng = np.random.default_rng(23)
        positions = compact_cluster(rng, 5)
        graph = build_graph(positions, GraphConfig())
        C = metropolis_weights(graph)
        finals = []
        for trial in range(200):
            ms = sample_measurements(positions, graph, NoiseConfig(), measurement_streams(50, trial))
            diffs = differential_coords(ms, graph)
            agents = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 300)
            finals.append(agents[0].w)
        finals = np.asarray(finals)
        mean_est = finals.mean(axis=0)
        sem = finals.std(axis=0, ddof=1) / np.sqrt(len(finals))
        err = np.linalg.norm(mean_est - positions)
        assert err <= 3.0 * np.linalg.norm(sem)

    def test_single_vehicle_gllme_equals_gllms(self):
        positions = np.array([(10.0, 20.0)])
        graph, C, ms, diffs = make_instance(positions, seed=5)
        a = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 10)
        b = gllme_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 10)
        assert np.array_equal(a[0].w, b[0].w)
        assert np.array_equal(a[0].w, ms.gps)  # isolated: estimate stays at GPS

    def test_isolated_vehicle_keeps_gps(self):
        positions = np.array([(0.0, 0.0), (5.0, 0.0), (500.0, 0.0)])
        graph, C, ms, diffs = make_instance(positions, seed=6)
        agents = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 40)
        assert np.array_equal(agents[2].w, ms.gps)


class TestDivergenceDetection:
    def test_doubled_step_size_is_caught_not_silent(self, monkeypatch):
        graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0, seed=7)
        original = compute_step_sizes

        def doubled(graph, C):
            sizes = original(graph, C)
            return StepSizes(2.0 * sizes.mu1, 2.0 * sizes.mu2)

        monkeypatch.setattr("lapdiff.diffusion.compute_step_sizes", doubled)
        agents = gps_agents(graph, ms.gps)
        try:
            agents = gllms_iterate(agents, graph, C, diffs, 3000)
        except DivergenceError as exc:
            assert exc.algorithm == "gllms"
            assert 0 <= exc.vehicle < 3
            assert exc.iteration >= 1
        else:
            for agent in agents:
                assert np.isfinite(agent.w).all()

    def test_error_carries_provenance(self):
        graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0, seed=8)
        bad = differential_coords(ms, graph)
        bad.delta[0, 0] = np.inf
        with pytest.raises(DivergenceError) as err:
            gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs.__class__(bad.delta, bad.valid), 5, time_step=9)
        assert err.value.time_step == 9
        assert err.value.iteration == 1


class TestDelay:
    def test_zero_lag_identical_to_no_delay(self):
        graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0, seed=9)
        none = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 30)
        zero = DelayPolicy(mode="random_set", tau_values=(1,), probability=0.0)
        delayed = gllms_iterate(
            gps_agents(graph, ms.gps, max_lag=1), graph, C, diffs, 30,
            delay=zero, rng=substream(1, 5),
        )
        for a, b in zip(none, delayed):
            assert np.array_equal(a.w, b.w)

    def test_lag_before_first_iteration_reads_initialization(self):
        positions = np.array([(300.0, 100.0), (305.0, 100.0)])
        graph, C, ms, diffs = make_instance(positions, seed=10)
        delay = DelayPolicy(mode="random_set", tau_values=(3,), probability=1.0)
        init = initial_estimates(graph, ms.gps, None, InitPolicy("gps"))
        agents = make_agents(graph, init, max_lag=3)

        from lapdiff.diffusion import compute_step_sizes as css
        from lapdiff.sensing import scaled_differentials

        mu = css(graph, metropolis_weights(graph)).mu1
        m = scaled_differentials(diffs, graph)
        L = graph.laplacian
        # expected first combine: own psi current, neighbor entry from init
        err = m - np.einsum("ij,ija->ia", L, init)
        psi = init + mu[:, None, None] * L[:, :, None] * err[:, None, :]
        W = C.weights
        expected0 = W[0, 0] * psi[0] + W[0, 1] * init[1]

        seen = []
        gllms_iterate(
            agents, graph, C, diffs, 1, delay=delay, rng=substream(2, 6),
            on_iteration=lambda k, Wmat: seen.append(Wmat.copy()),
        )
        assert np.allclose(seen[0][0], expected0, atol=1e-14)

    def test_random_set_lag_table(self):
        graph = build_graph(triangle(), GraphConfig(comm_range=5.0))
        policy = DelayPolicy(mode="random_set", tau_values=(1, 2, 3, 4), probability=1.0)
        lags = policy.realize(50, graph, substream(3, 7))
        assert lags.shape == (50, 3, 3)
        assert set(np.unique(lags[:, 0, 1])) <= {1, 2, 3, 4}
        assert (np.diagonal(lags, axis1=1, axis2=2) == 0).all()
        # one lag per (vehicle, iteration), applied to every source
        assert (lags[:, 0, 1] == lags[:, 0, 2]).all()

    def test_fixed_fraction_subset_sizes(self):
        rng = np.random.default_rng(29)
        positions = compact_cluster(rng, 8)
        graph = build_graph(positions, GraphConfig())
        policy = DelayPolicy(mode="fixed_fraction", tau_values=(4,), fraction=0.8)
        lags = policy.realize(20, graph, substream(4, 8))
        for i in range(graph.n):
            delayed = np.flatnonzero(lags[0, i])
            assert len(delayed) == round(0.8 * graph.degrees[i])
            assert set(delayed) <= set(graph.neighbors_of(i))
            assert (lags[:, i, delayed] == 4).all()  # fixed over iterations

    def test_delay_requires_rng(self):
        graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0)
        policy = DelayPolicy(mode="random_set")
        with pytest.raises(InvalidInputError):
            gllms_iterate(gps_agents(graph, ms.gps, 4), graph, C, diffs, 5, delay=policy)

    def test_psi_history_bounded(self):
        graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0, seed=11)
        policy = DelayPolicy(mode="random_set", tau_values=(1, 2, 3, 4), probability=1.0)
        agents = gllms_iterate(
            gps_agents(graph, ms.gps, max_lag=4), graph, C, diffs, 30,
            delay=policy, rng=substream(5, 9),
        )
        for agent in agents:
            assert len(agent.psi_history) <= 5


class TestInitialization:
    def test_gps_mode_and_first_step(self):
        graph, C, ms, _ = make_instance(triangle(), comm_range=5.0, seed=12)
        w = coherent_init(0, graph, ms.gps, None, InitPolicy("coherent"))
        assert np.array_equal(w, ms.gps)
        w = coherent_init(0, graph, ms.gps, np.zeros((3, 2)), InitPolicy("gps"))
        assert np.array_equal(w, ms.gps)

    def test_small_neighborhood_takes_all_from_previous(self):
        # 10 vehicles, vehicle 0 connected to 3 others: ratio 0.4 < 0.8
        positions = np.zeros((10, 2))
        positions[:4] = [(0, 0), (5, 0), (0, 5), (5, 5)]
        positions[4:] = [(200 + 30 * i, 200) for i in range(6)]
        graph = build_graph(positions, GraphConfig())
        assert graph.degrees[0] == 3
        gps = np.arange(20, dtype=float).reshape(10, 2)
        prev = 1000.0 + np.arange(20, dtype=float).reshape(10, 2)
        w = coherent_init(0, graph, gps, prev, InitPolicy("coherent", threshold=0.8))
        assert np.array_equal(w[0], gps[0])  # self from GPS
        for l in (1, 2, 3):  # all neighbors from previous solution
            assert np.array_equal(w[l], prev[l])
        for j in range(4, 10):  # non-neighbors from GPS
            assert np.array_equal(w[j], gps[j])

    def test_half_split_by_ascending_id(self):
        # 4 fully connected vehicles: ratio 1.0 >= 0.8, agent 0's neighbors
        # {1, 2, 3}: first ceil(3/2)=2 from previous, the rest from GPS
        positions = np.array([(0, 0), (3, 0), (0, 3), (3, 3)], dtype=float)
        graph = build_graph(positions, GraphConfig())
        gps = np.arange(8, dtype=float).reshape(4, 2)
        prev = -np.arange(8, dtype=float).reshape(4, 2)
        w = coherent_init(0, graph, gps, prev, InitPolicy("coherent", threshold=0.8))
        assert np.array_equal(w[1], prev[1])
        assert np.array_equal(w[2], prev[2])
        assert np.array_equal(w[3], gps[3])

    def test_membership_reset(self):
        assert not reset_on_membership_change((0, 1, 2), (2, 1, 0))
        assert reset_on_membership_change((0, 1, 2), (0, 1))
        assert reset_on_membership_change((0, 1, 2), (0, 1, 3))  # same size, different set


def test_agent_state_contract():
    graph, C, ms, diffs = make_instance(triangle(), comm_range=5.0, seed=13)
    agents = gllms_iterate(gps_agents(graph, ms.gps), graph, C, diffs, 5)
    for i, agent in enumerate(agents):
        assert isinstance(agent, AgentState)
        assert agent.id == i
        assert agent.w.shape == (3, 2)
        assert agent.psi.shape == (3, 2)
        assert np.isfinite(agent.w).all()
