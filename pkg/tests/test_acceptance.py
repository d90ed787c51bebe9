"""Acceptance suite: one test per headline criterion, at its stated tolerance.

Every test prints a single PASS/FAIL line (visible with ``pytest -s``) before
asserting, so a full run doubles as a scorecard.  All runs use fixed seeds.
"""

import numpy as np
import pytest
from dataclasses import replace

from lapdiff import (
    DelayPolicy,
    DivergenceError,
    GraphConfig,
    NoiseConfig,
    ScenarioConfig,
    build_graph,
    cll_solve,
    differential_coords,
    extended_laplacian,
    glcg_iterate,
    gllme_iterate,
    gllms_iterate,
    initial_estimates,
    make_agents,
    measurement_streams,
    metropolis_weights,
    run_scenario,
    sample_measurements,
    scaled_differentials,
)
from lapdiff.cli import load_config, main, read_metric_csv
from lapdiff.diffusion import InitPolicy

BASE_SEED = 42
ZERO_NOISE = NoiseConfig(0.0, 0.0, 0.0, 0.0)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def averaged_reductions(cfg: ScenarioConfig, seeds: int = 5) -> dict[str, float]:
    totals: dict[str, list[float]] = {}
    for i in range(seeds):
        record = run_scenario(replace(cfg, seed=BASE_SEED + i))
        for algo, value in record.reduction.items():
            totals.setdefault(algo, []).append(value)
    return {algo: float(np.mean(vals)) for algo, vals in totals.items()}


def compact_cluster(rng, n, spread=14.0):
    center = rng.uniform(80, 400, size=2)
    while True:
        pts = center + rng.uniform(0, spread, size=(n, 2))
        graph = build_graph(pts, GraphConfig())
        if n == 1 or np.sort(np.linalg.eigvalsh(graph.laplacian))[1] > 1e-6:
            return pts, graph


def measured_instance(positions, graph, seed, t=0, noise=None):
    ms = sample_measurements(positions, graph, noise or NoiseConfig(), measurement_streams(seed, t))
    diffs = differential_coords(ms, graph)
    return ms, diffs, metropolis_weights(graph)


def gps_agents(graph, gps, max_lag=0):
    return make_agents(graph, initial_estimates(graph, gps, None, InitPolicy("gps")), max_lag)


def test_gps_error_reduction_n13():
    # default scenario, five seeds: >= 85% reduction for the three diffusion
    # algorithms and >= 80% for the centralized baseline
    avg = averaged_reductions(ScenarioConfig())
    ok = (
        avg["gllms"] >= 0.85 and avg["gllme"] >= 0.85
        and avg["glcg"] >= 0.85 and avg["cll"] >= 0.80
    )
    report(
        "GPS-error reduction, N=13",
        ok,
        "avg over 5 seeds: " + ", ".join(f"{a}={avg[a]:.3f}" for a in sorted(avg))
        + " (need diffusion >= 0.85, cll >= 0.80)",
    )
    assert ok


def test_small_vanet_fast_convergence_n3():
    # N=3: every diffusion algorithm within 10% of the centralized deviation
    # level by iteration 3
    record = run_scenario(ScenarioConfig(n=3, seed=BASE_SEED))
    level = 1.10 * record.amsd["cll"][0]
    at3 = {a: record.amsd[a][2] for a in ("gllms", "gllme", "glcg")}
    ok = all(v <= level for v in at3.values())
    report(
        "Small-VANET fast convergence, N=3",
        ok,
        ", ".join(f"{a}@3={v:.3e}" for a, v in at3.items()) + f" vs 1.1*cll={level:.3e}",
    )
    assert ok


def test_exchange_speedup_n13():
    # iterations to enter the 5% band of the converged learning curve:
    # measurement exchanges must cut them to at most 0.75x
    cfg = ScenarioConfig(
        n=13, horizon=150, iterations=500, algorithms=("gllms", "gllme"), seed=BASE_SEED
    )
    record = run_scenario(cfg)

    def iterations_to_band(curve):
        return int(np.argmax(curve <= curve[-1] * 1.05)) + 1

    k_lms = iterations_to_band(record.amsd["gllms"])
    k_lme = iterations_to_band(record.amsd["gllme"])
    ratio = k_lme / k_lms
    ok = ratio <= 0.75
    report(
        "Exchange speedup, N=13",
        ok,
        f"gllme {k_lme} vs gllms {k_lms} iterations (ratio {ratio:.2f}, need <= 0.75)",
    )
    assert ok


def test_oracle_equivalence():
    # 50 random connected instances (N <= 6): the solver matches the explicit
    # normal-equations oracle to 1e-8 relative, and long diffusion runs land
    # within 1% relative Frobenius of the centralized solution
    rng = np.random.default_rng(BASE_SEED)
    worst_oracle = 0.0
    worst_diffusion = 0.0
    for trial in range(50):
        n = int(rng.integers(2, 7))
        positions, graph = compact_cluster(rng, n)
        ms, diffs, C = measured_instance(positions, graph, seed=1000 + trial)
        sol = cll_solve(graph, diffs, ms.gps)

        stacked = extended_laplacian(graph).matrix
        scaled = scaled_differentials(diffs, graph)
        oracle = np.empty_like(sol.positions)
        gram = stacked.T @ stacked
        for axis in range(2):
            rhs = np.concatenate([scaled[:, axis], ms.gps[:, axis]])
            oracle[:, axis] = np.linalg.solve(gram, stacked.T @ rhs)
        worst_oracle = max(
            worst_oracle,
            float(np.linalg.norm(sol.positions - oracle) / np.linalg.norm(oracle)),
        )

        for iterate in (gllms_iterate, gllme_iterate):
            agents = iterate(gps_agents(graph, ms.gps), graph, C, diffs, 500)
            rel = np.linalg.norm(agents[0].w - sol.positions) / np.linalg.norm(sol.positions)
            worst_diffusion = max(worst_diffusion, float(rel))
    ok = worst_oracle < 1e-8 and worst_diffusion < 0.01
    report(
        "Oracle equivalence",
        ok,
        f"worst cll-vs-normal-equations {worst_oracle:.2e} (< 1e-8), "
        f"worst diffusion-vs-cll {worst_diffusion:.2e} (< 0.01)",
    )
    assert ok


def test_consensus_property():
    # connected graphs, no delay, run to convergence: all agents agree
    # pairwise within 1e-6 for all three algorithms
    rng = np.random.default_rng(7 * BASE_SEED)
    worst = 0.0
    for n in (3, 5, 6, 8):
        positions, graph = compact_cluster(rng, n)
        ms, diffs, C = measured_instance(positions, graph, seed=2000 + n)
        for iterate in (gllms_iterate, gllme_iterate, glcg_iterate):
            agents = iterate(gps_agents(graph, ms.gps), graph, C, diffs, 700)
            spread = max(
                np.abs(a.w - b.w).max()
                for i, a in enumerate(agents) for b in agents[i + 1:]
            )
            worst = max(worst, float(spread))
    ok = worst <= 1e-6
    report("Consensus property", ok, f"max pairwise deviation {worst:.2e} (<= 1e-6)")
    assert ok


def test_appendix_eigenvalue_identities():
    # on 1000 random graphs: the rank-one row covariance has top eigenvalue
    # d^2 + d, and the aggregated covariance eigenvalue never exceeds the
    # worst neighborhood bound
    rng = np.random.default_rng(11 * BASE_SEED)
    worst_identity = 0.0
    bound_ok = True
    for _ in range(1000):
        n = int(rng.integers(2, 10))
        positions = rng.uniform(0, 35, size=(n, 2))
        graph = build_graph(positions, GraphConfig())
        L = graph.laplacian
        C = metropolis_weights(graph).weights
        for i in range(n):
            d = graph.degrees[i]
            top = np.linalg.eigvalsh(np.outer(L[i], L[i]))[-1]
            worst_identity = max(worst_identity, abs(top - (d * d + d)))
            if d >= 1:
                S = np.einsum("l,lj,lk->jk", C[i], L, L)
                lam2max = np.linalg.eigvalsh(S)[-1]
                bound = max(
                    graph.degrees[l] ** 2 + graph.degrees[l] for l in graph.neighborhoods[i]
                )
                if lam2max > bound + 1e-9:
                    bound_ok = False
    ok = worst_identity <= 1e-9 and bound_ok
    report(
        "Appendix eigenvalue identities",
        ok,
        f"max |lambda_max - (d^2+d)| = {worst_identity:.2e} (<= 1e-9), "
        f"aggregated bound held: {bound_ok}",
    )
    assert ok


def test_delay_robustness_n13():
    # random per-(vehicle, iteration) delays from {1..4}: the exchange variant
    # stays at least as accurate as plain LMS, and both finish;
    # the conjugate-gradient variant must never emit non-finite values silently
    delay = DelayPolicy(mode="random_set", tau_values=(1, 2, 3, 4), probability=1.0)
    cfg = ScenarioConfig(algorithms=("gllms", "gllme"), delay=delay, seed=BASE_SEED)
    record = run_scenario(cfg)
    lms, lme = record.reduction["gllms"], record.reduction["gllme"]

    glcg_silent_nonfinite = False
    glcg_outcome = "completed finite"
    try:
        cg_record = run_scenario(replace(cfg, algorithms=("glcg",)))
        if not all(np.isfinite(v).all() for v in cg_record.lmse.values()):
            glcg_silent_nonfinite = True
            glcg_outcome = "emitted non-finite values silently"
    except DivergenceError as exc:
        glcg_outcome = f"diverged and was caught ({exc.algorithm}, t={exc.time_step})"

    ok = lme >= lms and not glcg_silent_nonfinite
    report(
        "Delay robustness, N=13",
        ok,
        f"reductions under delay: gllme={lme:.3f} >= gllms={lms:.3f}; glcg {glcg_outcome}",
    )
    assert ok


def test_range_noise_robustness_n15():
    # heavy range noise (4 m, 7 deg): plain LMS is the most robust, the
    # exchange variants degrade in order, LMS stays above 65% reduction
    noise = NoiseConfig.from_degrees(sigma_d=4.0, sigma_az_deg=7.0)
    avg = averaged_reductions(ScenarioConfig(n=15, noise=noise))
    ok = avg["gllms"] >= avg["gllme"] >= avg["glcg"] and avg["gllms"] >= 0.65
    report(
        "Range-noise robustness, N=15",
        ok,
        f"gllms={avg['gllms']:.3f} >= gllme={avg['gllme']:.3f} >= glcg={avg['glcg']:.3f}, "
        f"gllms >= 0.65",
    )
    assert ok


def test_fixed_point_and_zero_noise():
    # truth-initialized zero-noise runs must not drift more than 1e-12 per
    # iteration, and the centralized solve recovers the truth to 1e-9
    rng = np.random.default_rng(13 * BASE_SEED)
    positions, graph = compact_cluster(rng, 6)
    ms, diffs, C = measured_instance(positions, graph, seed=3000, noise=ZERO_NOISE)
    init = np.tile(positions[None], (graph.n, 1, 1))
    worst_drift = 0.0
    for iterate in (gllms_iterate, gllme_iterate, glcg_iterate):
        drifts = []
        iterate(
            make_agents(graph, init), graph, C, diffs, 60,
            on_iteration=lambda k, W: drifts.append(np.abs(W - init).max()),
        )
        worst_drift = max(worst_drift, float(max(drifts)))
    sol = cll_solve(graph, diffs, ms.gps)
    cll_err = float(np.abs(sol.positions - positions).max())
    ok = worst_drift <= 1e-12 and cll_err <= 1e-9
    report(
        "Fixed-point and zero-noise suites",
        ok,
        f"max per-iteration drift {worst_drift:.2e} (<= 1e-12), "
        f"zero-noise cll error {cll_err:.2e} (<= 1e-9)",
    )
    assert ok


def test_gps_statistical_baseline():
    # 1e4 GPS noise draws from the default-seed stream: the sample mean of
    # ||noise|| must fall in 3.4 +/- 0.05 and the mean noise energy within
    # 5% of sigma_x^2 + sigma_y^2 = 15.25.
    #
    # Note: the exact expectation of ||noise|| for sigma = (3, 2.5) is
    # 3.4537 m (Gaussian quadrature), which already lies outside the stated
    # band; the quoted 3.4 is that value rounded down.  The test asserts the
    # criterion as written.
    noise = NoiseConfig()
    streams = measurement_streams(BASE_SEED, 0)
    draws = streams.gps.standard_normal((10**4, 2)) * np.array([noise.sigma_x, noise.sigma_y])
    mean_norm = float(np.hypot(draws[:, 0], draws[:, 1]).mean())
    mean_energy = float((draws**2).sum(axis=1).mean())
    norm_ok = abs(mean_norm - 3.4) <= 0.05
    energy_ok = abs(mean_energy - 15.25) <= 0.05 * 15.25
    ok = norm_ok and energy_ok
    report(
        "GPS statistical baseline",
        ok,
        f"mean norm {mean_norm:.4f} (band 3.35..3.45, exact expectation 3.4537), "
        f"mean energy {mean_energy:.3f} (band 14.49..16.01)",
    )
    assert ok


def test_run_determinism(tmp_path):
    # identical configs produce byte-identical CSV artifacts (timings live
    # only in summary.json and are excluded)
    ini = tmp_path / "det.ini"
    ini.write_text("[scenario]\nn = 8\nhorizon = 40\niterations = 30\nseed = 42\n")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(ini), "--out", str(out_a)]) == 0
    assert main(["run", "--config", str(ini), "--out", str(out_b)]) == 0
    names = ("amsd.csv", "lmse.csv", "cdf.csv", "connectivity.csv", "manifest.json")
    same = {name: (out_a / name).read_bytes() == (out_b / name).read_bytes() for name in names}
    ok = all(same.values())
    report(
        "Determinism",
        ok,
        "byte-identical: " + ", ".join(f"{n}={v}" for n, v in same.items()),
    )
    assert ok
