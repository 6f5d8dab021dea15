"""Acceptance criteria at their stated sizes and tolerances (hours on one core).

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary.  Seeds are fixed constants chosen once.
"""
import numpy as np
import pytest

from edgelab import io as rio
from edgelab.constants import berry_esseen_bound
from edgelab.ensemble import (
    build_centered_adjacency,
    constrained_goe_covariance,
    critical_time,
    evolve_exact,
    evolve_path,
    max_row_sum,
    sample_constrained_goe,
    sample_constrained_goe_batch,
)
from edgelab.experiment import ExperimentConfig, run_experiment
from edgelab.graphs import sample_regular_graph
from edgelab.metrics import estimate_cumulants, fit_rate, ks_distance_to_normal, ks_two_sample
from edgelab.overlaps import compute_overlaps, make_test_vector, simulate_overlap_sde
from edgelab.spectral import (
    decompose,
    decompose_values,
    edge_grid,
    edge_spacing_profile,
    gap_sum_statistic,
    local_law_deviation_profile,
    top_eigenpairs,
)

pytestmark = pytest.mark.acceptance

GRAPH_SIZES = [500, 1000, 2000, 4000]
DEGREE = 3
EPSILON = 0.1


def goe_overlaps(n, trials, seed, batch=200):
    """sqrt(N) <q, v_2> for the top eigenvector of constrained GOE draws."""
    q = make_test_vector("coordinate-difference", n).coords
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=trials) * 2 - 1
    out = np.empty(trials)
    done = 0
    while done < trials:
        size = min(batch if n <= 400 else 1, trials - done)
        mats = sample_constrained_goe_batch(n, size, rng)
        for w in mats:
            v = top_eigenpairs(w, 1, seed=done).eigenvector(2)
            out[done] = np.sqrt(n) * (v @ q) * signs[done]
            done += 1
    return out


# --- shared ensembles ---------------------------------------------------------


@pytest.fixture(scope="session")
def graph_run(tmp_path_factory):
    """The experiment pipeline over the default sizes, 4000 trials each."""
    cfg = ExperimentConfig(
        sizes=GRAPH_SIZES,
        degree=DEGREE,
        epsilon=EPSILON,
        trials=4000,
        base_seed=20240601,
        times=["0"],
        test_vectors=["coordinate-difference"],
        K=4,
        m=1,
        statistics=["moments", "decorrelation", "ks", "joint"],
        output_dir=str(tmp_path_factory.mktemp("graph_run")),
    )
    rec = run_experiment(cfg)
    by = {(s["statistic_name"], s["N"]): s for s in rec.summaries}
    return cfg, rec, by


@pytest.fixture(scope="session")
def full_spectra():
    """Full decompositions of 200 matched-seed graphs per size.

    Seeds 0-99 get eigenvectors (local law); 100-199 eigenvalues only.
    """
    out = {}
    for n in GRAPH_SIZES:
        q = make_test_vector("coordinate-difference", n).coords
        energies, etas = edge_grid(n, EPSILON)
        spacing, gaps, sups = [], [], []
        for seed in range(200):
            h = build_centered_adjacency(sample_regular_graph(n, DEGREE, seed))
            sd = decompose(h) if seed < 100 else decompose_values(h)
            spacing.append(edge_spacing_profile(sd, 40)[:, 1])
            gaps.append(gap_sum_statistic(sd, 2))
            if seed < 100:
                sups.append(local_law_deviation_profile(sd, q, energies, etas, EPSILON).supremum)
        out[n] = dict(spacing=np.array(spacing), gaps=gaps, sups=np.array(sups))
    return out


# --- criteria -----------------------------------------------------------------


def test_01_constraint_preservation(report):
    worst = 0.0
    count = 0
    rng = np.random.default_rng(101)
    for n, n_exact, n_paths in ((100, 400, 100), (1000, 450, 50)):
        for k in range(n_exact):
            h0 = build_centered_adjacency(sample_regular_graph(n, DEGREE, 10_000 + k))
            t = critical_time(n, EPSILON) if k % 2 else rng.uniform(0, 3)
            worst = max(worst, max_row_sum(evolve_exact(h0, t, rng)) / n)
            count += 1
        for k in range(n_paths):
            h0 = build_centered_adjacency(sample_regular_graph(n, DEGREE, 20_000 + k))
            path = evolve_path(h0, 0.2, 5, seed=rng)
            worst = max(worst, max_row_sum(path.states[-1]) / n)
            count += 1
    ok = report(1, worst <= 1e-10, f"{count} evolved matrices, max row sum / N = {worst:.3e} (<= 1e-10)")
    assert ok


def _random_tuples(n, count, rng):
    tuples = []
    for k in range(count):
        i, j, a, b = rng.integers(0, n, size=4)
        pattern = k % 4  # force index coincidences in three quarters of the tuples
        if pattern == 1:
            a, b = i, j
        elif pattern == 2:
            a = i
        elif pattern == 3:
            j = i
        tuples.append((int(i), int(j), int(a), int(b)))
    return tuples


def test_02_constrained_goe_covariance(report):
    rng = np.random.default_rng(202)
    worst, details = 0.0, []
    for n in (50, 200):
        tuples = _random_tuples(n, 100, rng)
        idx = np.array(tuples).T
        s1 = np.zeros(len(tuples))
        s2 = np.zeros(len(tuples))
        total, batch = 10**5, 1000
        for _ in range(total // batch):
            w = sample_constrained_goe_batch(n, batch, rng)
            prod = w[:, idx[0], idx[1]] * w[:, idx[2], idx[3]]
            s1 += prod.sum(axis=0)
            s2 += (prod**2).sum(axis=0)
        mean = s1 / total
        se = np.sqrt((s2 / total - mean**2) / (total - 1))
        z = np.abs(mean - constrained_goe_covariance(*idx, n)) / se
        worst = max(worst, z.max())
        details.append(f"N={n}: max |z| = {z.max():.2f}")
    ok = report(2, worst <= 4.0, "100 tuples x 10^5 samples, " + ", ".join(details) + " (<= 4 SE)")
    assert ok


def test_03_goe_fourth_cumulant(report):
    n = 300
    x = goe_overlaps(n, 2 * 10**5, seed=303)
    c = estimate_cumulants(x)
    k4, se = c.values[3], c.std_errors[3]
    target = 12 / (n - 1)
    sphere = -6 * n**2 / ((n - 1) ** 2 * (n + 1))
    z = (k4 - target) / se
    ok = report(
        3,
        abs(z) <= 4,
        f"kappa4 = {k4:.4f} +- {se:.4f} vs 12/299 = {target:.4f} ({z:+.1f} SE); "
        f"exact spherical value {sphere:.4f} ({(k4 - sphere) / se:+.1f} SE)",
    )
    assert ok


def test_04_goe_berry_esseen_scale(report):
    ks = {n: ks_distance_to_normal(goe_overlaps(n, 2 * 10**4, seed=400 + n)) for n in (200, 800)}
    ok = report(
        4,
        ks[800] < ks[200] and ks[800] <= 0.02,
        f"KS(200) = {ks[200]:.4f}, KS(800) = {ks[800]:.4f} (need KS(800) < KS(200) and KS(800) <= 0.02)",
    )
    assert ok


def test_05_graph_moments(report, graph_run):
    _, _, by = graph_run
    s = by[("moments_X2", 2000)]
    m2, m4 = s["value"], s["fourth"]
    ok = report(
        5,
        0.85 <= m2 <= 1.15 and 2.4 <= m4 <= 3.6,
        f"N=2000: E[X2^2] = {m2:.4f} +- {s['std_error']:.4f} in [0.85, 1.15], "
        f"E[X2^4] = {m4:.4f} +- {s['fourth_std_error']:.4f} in [2.4, 3.6]",
    )
    assert ok


def test_06_decorrelation(report, graph_run):
    _, _, by = graph_run
    vals = {n: abs(by[("product_moment_X2_X3", n)]["value"]) for n in (500, 1000, 2000)}
    se = by[("product_moment_X2_X3", 2000)]["std_error"]
    monotone = vals[500] >= vals[1000] >= vals[2000]
    ok = report(
        6,
        vals[2000] <= 0.1 and monotone,
        "|E[X2 X3]| = " + ", ".join(f"{vals[n]:.4f} (N={n})" for n in vals) + f"; SE at 2000 = {se:.4f}; "
        "need <= 0.1 at 2000 and non-increasing",
    )
    assert ok


def test_07_berry_esseen_trend(report, graph_run):
    _, _, by = graph_run
    pts = [(n, by[("ks_distance_X2", n)]["value"]) for n in GRAPH_SIZES]
    fit = fit_rate(pts)
    ks4000 = pts[-1][1]
    ok = report(
        7,
        ks4000 <= 0.08 and -0.45 <= fit.exponent <= -0.02,
        "KS = " + ", ".join(f"{v:.4f}" for _, v in pts) + f"; exponent {fit.exponent:+.3f} in [-0.45, -0.02]",
    )
    assert ok


def test_08_cross_ensemble(report, graph_run):
    cfg, _, _ = graph_run
    rows = rio.read_csv(f"{cfg.output_dir}/overlaps_N2000.csv")
    graph = np.array([float(r["value"]) for r in rows if r["index"] == "2"])
    goe = goe_overlaps(2000, 4000, seed=808)
    stat, p = ks_two_sample(graph, goe)
    ok = report(8, p >= 0.01, f"N=2000, {graph.size} vs {goe.size} trials: KS = {stat:.4f}, p = {p:.3f} (>= 0.01)")
    assert ok


def test_09_sde_oracle(report):
    n, t, steps, want = 100, 0.05, 2000, 1000
    q = make_test_vector("coordinate-difference", n)
    idx = np.arange(2, n + 1)
    exact, sde, drawn, excluded = [], [], 0, 0
    seed = 900_000
    while len(sde) < want:
        x0, l0 = [], []
        for _ in range(min(250, 2 * (want - len(sde)))):
            h = build_centered_adjacency(sample_regular_graph(n, DEGREE, seed))
            sd = decompose(h)
            x0.append(compute_overlaps(sd, q, idx, seed=seed).values)
            l0.append(sd.eigenvalues[1:])
            ht = evolve_exact(h, t, seed=seed + 10**7)
            exact.append(compute_overlaps(decompose(ht), q, [2], seed=seed).value(2))
            seed += 1
        traj = simulate_overlap_sde(np.array(x0), np.array(l0), t, steps, seed=seed, n=n, pair_split=True)
        drawn += len(x0)
        excluded += int(traj.aborted.sum())
        sde.extend(traj.final_overlaps[~traj.aborted, 0].tolist())
    sde = np.array(sde[:want])
    stat, p = ks_two_sample(sde, np.array(exact))
    ok = report(
        9,
        p >= 0.01,
        f"N=100, t=0.05: KS = {stat:.4f}, p = {p:.3f} (>= 0.01); {excluded} of {drawn} SDE trials excluded",
    )
    assert ok


def test_10_edge_spacing(report, full_spectra):
    n = 4000
    mean_dist = full_spectra[n]["spacing"].mean(axis=0)
    k = np.arange(1, 41)
    sel = k >= 4
    fit = fit_rate(np.column_stack((k[sel] / n, mean_dist[sel])))
    ok = report(10, 0.55 <= fit.exponent <= 0.80, f"N=4000, 200 seeds: slope {fit.exponent:.3f} in [0.55, 0.80]")
    assert ok


def test_11_gap_sum(report, full_spectra):
    meds = {}
    degenerate = 0
    for n in GRAPH_SIZES:
        vals = np.array([g.value for g in full_spectra[n]["gaps"]])
        degenerate += int(np.isnan(vals).sum())
        meds[n] = float(np.median(vals[~np.isnan(vals)]))
    fit = fit_rate(list(meds.items()))
    ratio = meds[4000] / (np.pi**2 / 6 * 4000 ** (4 / 3))
    ok = report(
        11,
        1.1 <= fit.exponent <= 1.6,
        f"medians " + ", ".join(f"{v:.4g}" for v in meds.values()) + f"; exponent {fit.exponent:.3f} in [1.1, 1.6]; "
        f"median / (pi^2/6 N^(4/3)) at 4000 = {ratio:.2f}; degenerate {degenerate}",
    )
    assert ok


def test_12_delocalization(report, tmp_path):
    cfg = ExperimentConfig(
        sizes=[4000], degree=DEGREE, epsilon=EPSILON, trials=500, base_seed=1212,
        statistics=["delocalization"], output_dir=str(tmp_path),
    )
    rec = run_experiment(cfg)
    p99 = next(s for s in rec.summaries if s["statistic_name"] == "sup_norm_scaled_p99")["value"]
    ok = report(12, p99 <= 3.0, f"N=4000, 500 seeds: p99 of sqrt(N)|u2|_inf/sqrt(log N) = {p99:.3f} (<= 3)")
    assert ok


def test_13_local_law_trend(report, full_spectra):
    meds = [float(np.median(full_spectra[n]["sups"])) for n in GRAPH_SIZES]
    ok = report(
        13,
        all(a >= b for a, b in zip(meds, meds[1:])),
        "median grid-sup deviation " + ", ".join(f"{m:.4f} (N={n})" for m, n in zip(meds, GRAPH_SIZES)) + "; need non-increasing",
    )
    assert ok


def test_14_worked_bound(report):
    b = berry_esseen_bound(1e6, 3, 0.01)
    ok = report(14, abs(b.n_factor - 0.115) <= 0.001, f"N-factor at N=10^6, eps=0.01: {b.n_factor:.5f} (0.115 +- 0.001)")
    assert ok


def test_15_joint_covariance(report, graph_run):
    _, _, by = graph_run
    dev = by[("joint_covariance_deviation", 2000)]["value"]
    proxy = by[("projection_ks_proxy", 2000)]["value"]
    ok = report(
        15,
        dev <= 0.3 and proxy <= 0.08,
        f"K=4, m=1, N=2000: ||cov - I|| = {dev:.4f} (<= 0.3), projection proxy = {proxy:.4f} (<= 0.08)",
    )
    assert ok
