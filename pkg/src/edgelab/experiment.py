"""Seeded Monte Carlo experiments over graph sizes, from sampling to summaries.

Trial seeds come from :func:`derive_trial_seed`; each trial owns its generators
and returns a plain record, and a sequential reducer merges records in trial
order.  Identical configurations therefore produce byte-identical result files.
"""
from __future__ import annotations

import hashlib
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as rio
from .ensemble import build_centered_adjacency, centered_adjacency_operator, critical_time, evolve_exact
from .graphs import sample_regular_graph
from .metrics import fit_rate, ks_distance_to_normal, multivariate_gaussian_distance
from .overlaps import (
    compute_overlaps,
    delocalization_stats,
    estimate_decorrelation,
    estimate_moments,
    MIN_TRIALS,
    joint_covariance,
    make_test_vector,
)
from .spectral import (
    EigensolverError,
    decompose,
    edge_grid,
    edge_spacing_profile,
    gap_sum_statistic,
    local_law_deviation_profile,
    top_eigenpairs,
)

MASK64 = (1 << 64) - 1
WORKERS_ENV = "EDGELAB_WORKERS"

STATISTICS = (
    "moments",
    "decorrelation",
    "joint",
    "ks",
    "local_law",
    "spacing",
    "gap_sum",
    "delocalization",
)


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x`` (all arithmetic mod 2^64)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_trial_seed(base_seed: int, size_index: int, trial_index: int) -> int:
    """``splitmix64(splitmix64(splitmix64(base) ^ size_index) ^ trial_index)``.

    Inputs are reduced mod 2^64 first; the result is an unsigned 64-bit integer.
    """
    h = splitmix64(base_seed & MASK64)
    h = splitmix64(h ^ (size_index & MASK64))
    return splitmix64(h ^ (trial_index & MASK64))


def derive_trial_seeds(base_seed: int, size_index: int, trial_indices) -> np.ndarray:
    """Vectorized :func:`derive_trial_seed` over an array of trial indices."""
    t = np.asarray(trial_indices, dtype=np.uint64)
    h = np.uint64(splitmix64(splitmix64(base_seed & MASK64) ^ (size_index & MASK64)))
    x = (h ^ t) + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & MASK64, tag]))


class ConfigError(ValueError):
    def __init__(self, problems: dict):
        self.problems = problems
        super().__init__("invalid experiment config: " + "; ".join(f"{k}: {v}" for k, v in problems.items()))


@dataclass
class ExperimentConfig:
    """Experiment parameters; see :func:`parse_config` for the text format."""

    sizes: list = field(default_factory=lambda: [500, 1000, 2000, 4000])
    degree: int = 3
    epsilon: float = 0.1
    trials: int = 4000
    base_seed: int = 0
    times: list = field(default_factory=lambda: ["0"])
    test_vectors: list = field(default_factory=lambda: ["coordinate-difference"])
    K: int = 4
    m: int = 1
    statistics: list = field(default_factory=lambda: list(STATISTICS))
    output_dir: str = "results"
    k_max: int = 40
    n_energies: int = 5
    n_etas: int = 10
    n_projections: int = 50

    def validate(self) -> None:
        problems = {}
        if not self.sizes or any(int(n) < 50 for n in self.sizes):
            problems["sizes"] = "every size must be >= 50"
        elif any((int(n) * self.degree) % 2 for n in self.sizes):
            problems["sizes"] = f"every N*d must be even (d={self.degree})"
        if self.degree < 3:
            problems["degree"] = "must be >= 3"
        if not 0 < self.epsilon < 1:
            problems["epsilon"] = "must lie in (0, 1)"
        if self.trials < 1:
            problems["trials"] = "must be >= 1"
        for t in self.times:
            if t not in ("0", "t*"):
                try:
                    if float(t) < 0:
                        raise ValueError
                except ValueError:
                    problems["times"] = f"entries must be '0', 't*' or a non-negative number, got {t!r}"
        bad = [k for k in self.test_vectors if k not in ("coordinate-difference", "random-orthogonal", "indicator-set")]
        if bad or not self.test_vectors:
            problems["test_vectors"] = f"unknown or missing kinds {bad}"
        if self.K < 1:
            problems["K"] = "must be >= 1"
        if self.m < 1 or self.m > len(self.test_vectors):
            problems["m"] = "must be between 1 and the number of test vectors"
        unknown = [s for s in self.statistics if s not in STATISTICS]
        if unknown:
            problems["statistics"] = f"unknown statistics {unknown}"
        if self.k_max < 1:
            problems["k_max"] = "must be >= 1"
        if "spacing" in self.statistics and any(self.k_max > int(n) / 10 for n in self.sizes):
            problems["k_max"] = "must be <= N/10 for every size"
        if problems:
            raise ConfigError(problems)

    def canonical(self) -> str:
        """Canonical serialization (output_dir excluded: it does not affect results)."""
        d = asdict(self)
        d.pop("output_dir")
        return "\n".join(f"{k}={_format_value(d[k])}" for k in sorted(d))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def resolved_times(self, n: int) -> list[tuple[str, float]]:
        out = []
        for t in self.times:
            if t == "0":
                out.append(("0", 0.0))
            elif t == "t*":
                out.append(("t*", critical_time(n, self.epsilon)))
            else:
                out.append((t, float(t)))
        return out


def _format_value(v):
    if isinstance(v, list):
        return ",".join(str(x) for x in v)
    return str(v)


_LIST_KEYS = {"sizes": int, "times": str, "test_vectors": str, "statistics": str}
_SCALAR_KEYS = {
    "degree": int,
    "epsilon": float,
    "trials": int,
    "base_seed": int,
    "K": int,
    "m": int,
    "output_dir": str,
    "k_max": int,
    "n_energies": int,
    "n_etas": int,
    "n_projections": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment, lists are comma separated).

    Keys mirror the :class:`ExperimentConfig` fields.
    """
    values, problems = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems[f"line {lineno}"] = f"expected key = value, got {raw!r}"
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                values[key] = [_LIST_KEYS[key](x.strip()) for x in val.split(",") if x.strip()]
            elif key in _SCALAR_KEYS:
                values[key] = _SCALAR_KEYS[key](val)
            else:
                problems[key] = "unknown key"
        except ValueError as exc:
            problems[key] = f"cannot parse {val!r}: {exc}"
    if problems:
        raise ConfigError(problems)
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else (os.cpu_count() or 1)


# --- trials -----------------------------------------------------------------


def _needs_full(cfg: ExperimentConfig) -> bool:
    return "local_law" in cfg.statistics or "gap_sum" in cfg.statistics


def run_trial(cfg: ExperimentConfig, size_index: int, trial_index: int, test_vectors) -> dict:
    """Everything one trial contributes, as a plain picklable dict."""
    n = int(cfg.sizes[size_index])
    seed = derive_trial_seed(cfg.base_seed, size_index, trial_index)
    rec = {"trial": trial_index, "seed": seed, "failure": None, "times": {}}
    g = sample_regular_graph(n, cfg.degree, seed)
    full = _needs_full(cfg)
    k = max(cfg.K, 2)
    if "spacing" in cfg.statistics:
        k = max(k, cfg.k_max + 1)
    h0 = None
    for t_idx, (label, t) in enumerate(cfg.resolved_times(n)):
        try:
            if t == 0 and not full:
                sd = top_eigenpairs(centered_adjacency_operator(g), k, seed=_stream(seed, 1).integers(2**32))
            else:
                if h0 is None:
                    h0 = build_centered_adjacency(g)
                h = h0 if t == 0 else evolve_exact(h0, t, _stream(seed, 10 + t_idx))
                if full:
                    sd = decompose(h)
                else:
                    sd = top_eigenpairs(h, k, seed=_stream(seed, 1).integers(2**32))
        except EigensolverError as exc:
            rec["failure"] = str(exc)
            return rec
        out = {}
        indices = np.arange(2, max(cfg.K, 2) + 2)
        ov = {}
        for tv_pos, q in enumerate(test_vectors):
            s = compute_overlaps(sd, q, indices, seed=_stream(seed, 100 + 7 * t_idx + tv_pos))
            ov[q.id] = s.values
        out["overlaps"] = ov
        out["indices"] = indices
        if "spacing" in cfg.statistics:
            out["spacing"] = edge_spacing_profile(sd, cfg.k_max)[:, 1]
        if "gap_sum" in cfg.statistics:
            gs = gap_sum_statistic(sd, 2)
            out["gap_sum"] = (gs.value, gs.degenerate)
        if "local_law" in cfg.statistics:
            energies, etas = edge_grid(n, cfg.epsilon, cfg.n_energies, cfg.n_etas)
            prof = local_law_deviation_profile(sd, test_vectors[0].coords, energies, etas, cfg.epsilon)
            out["local_law"] = prof.deviation
        if "delocalization" in cfg.statistics:
            dl = delocalization_stats(sd.eigenvector(2), seed=_stream(seed, 50 + t_idx))
            out["delocalization"] = (dl.sup_norm, dl.mass_deviation)
        rec["times"][label] = out
    return rec


def _run_size(cfg, size_index, test_vectors, workers):
    trials = range(cfg.trials)
    if workers <= 1:
        return [run_trial(cfg, size_index, i, test_vectors) for i in trials]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_trial, cfg, size_index, i, test_vectors) for i in trials]
        records = [f.result() for f in futures]
    return sorted(records, key=lambda r: r["trial"])


# --- reduction --------------------------------------------------------------


@dataclass
class ExperimentRecord:
    config_hash: str
    trial_seeds: dict
    summaries: list
    rate_fits: list
    wall_clock: dict
    version: str
    files: list = field(default_factory=list)


def _reduce_size(cfg, n, records, test_vectors, files, outdir):
    d, eps = cfg.degree, cfg.epsilon
    ok = [r for r in records if r["failure"] is None]
    failed = len(records) - len(ok)
    seed_range = [records[0]["trial"], records[-1]["trial"]] if records else [0, -1]
    summaries = []
    base = dict(excluded=failed, base_seed=cfg.base_seed)

    def add(name, value, se, trials, **extra):
        summaries.append(rio.summary(name, n, d, eps, trials, value, se, seed_range, **{**base, **extra}))

    overlap_rows, law_rows, spacing_rows = [], [], []
    energies, etas = edge_grid(n, eps, cfg.n_energies, cfg.n_etas)
    for label, t in cfg.resolved_times(n):
        tag = dict(t=t, time_label=label)
        per = [r["times"][label] for r in ok]
        if not per:
            continue
        indices = per[0]["indices"]
        for r, p in zip(ok, per):
            for q in test_vectors:
                for i, v in zip(indices, p["overlaps"][q.id]):
                    overlap_rows.append((n, d, r["seed"], t, int(i), q.id, float(v)))
        for q in test_vectors:
            x = np.array([p["overlaps"][q.id] for p in per])
            tv = dict(tag, test_vector_id=q.id)
            if "moments" in cfg.statistics and x.shape[0] >= 2:
                mo = estimate_moments(x[:, 0], min_trials=2)
                add(
                    "moments_X2", mo.second, mo.se_second, mo.n,
                    mean=mo.mean, mean_std_error=mo.se_mean, fourth=mo.fourth,
                    fourth_std_error=mo.se_fourth, below_min_trials=mo.n < MIN_TRIALS, **tv,
                )
            if "decorrelation" in cfg.statistics and x.shape[0] >= 100:
                dc = estimate_decorrelation(x[:, 0], other=x[:, 1])
                add("product_moment_X2_X3", dc.product_moment, dc.std_error, x.shape[0], correlation=dc.correlation, **tv)
            if "ks" in cfg.statistics:
                add("ks_distance_X2", ks_distance_to_normal(x[:, 0]), None, x.shape[0], **tv)
        if "joint" in cfg.statistics:
            qs = test_vectors[: cfg.m]
            z = np.hstack([np.array([p["overlaps"][q.id][: cfg.K] for p in per]) for q in qs])
            extra = dict(tag, K=cfg.K, m=cfg.m)
            if z.shape[0] >= 10 * z.shape[1]:
                jc = joint_covariance(z)
                add("joint_covariance_deviation", jc.deviation, None, z.shape[0], rank_deficient=jc.rank_deficient, **extra)
            if z.shape[0] >= 100:
                proxy = multivariate_gaussian_distance(z, cfg.n_projections, seed=cfg.base_seed)
                add("projection_ks_proxy", proxy, None, z.shape[0], proxy_note="max 1-D KS over random projections", **extra)
        if "spacing" in cfg.statistics:
            sp = np.array([p["spacing"] for p in per])
            for r, row in zip(ok, sp):
                for k, v in enumerate(row, start=1):
                    spacing_rows.append((n, d, r["seed"], k, float(v)))
            mean_dist = sp.mean(axis=0)
            ks = np.arange(1, cfg.k_max + 1)
            sel = (ks >= 4) & (ks <= 40)
            if sel.sum() >= 3 and np.all(mean_dist[sel] > 0):
                fit = fit_rate(np.column_stack((ks[sel] / n, mean_dist[sel])))
                add("edge_spacing_slope", fit.exponent, None, len(per), intercept=fit.intercept, residual=fit.residual, **tag)
        if "gap_sum" in cfg.statistics:
            vals = np.array([p["gap_sum"][0] for p in per])
            degenerate = int(sum(p["gap_sum"][1] for p in per))
            good = vals[~np.isnan(vals)]
            if good.size:
                add("gap_sum_median_i2", float(np.median(good)), None, good.size, degenerate=degenerate, **tag)
        if "local_law" in cfg.statistics:
            devs = np.array([p["local_law"] for p in per])
            for r, dev in zip(ok, devs):
                for a, e in enumerate(energies):
                    for b, eta in enumerate(etas):
                        law_rows.append((n, d, r["seed"], float(e), float(eta), float(dev[a, b])))
            add("local_law_sup_median", float(np.median(devs.max(axis=(1, 2)))), None, len(per), **tag)
        if "delocalization" in cfg.statistics:
            dl = np.array([p["delocalization"] for p in per])
            scaled = np.sqrt(n) * dl[:, 0] / np.sqrt(np.log(n))
            add("sup_norm_scaled_p99", float(np.percentile(scaled, 99)), None, len(per), **tag)
            add("mass_deviation_mean", float(dl[:, 1].mean()), float(dl[:, 1].std(ddof=1) / np.sqrt(len(per))) if len(per) > 1 else None, len(per), **tag)

    def out(name):
        path = outdir / name
        files.append(str(path.name))
        return path

    rio.write_csv(out(f"overlaps_N{n}.csv"), rio.OVERLAP_HEADER, overlap_rows)
    if "local_law" in cfg.statistics:
        rio.write_csv(out(f"local_law_N{n}.csv"), rio.LOCAL_LAW_HEADER, law_rows)
    if "spacing" in cfg.statistics:
        rio.write_csv(out(f"spacing_N{n}.csv"), rio.SPACING_HEADER, spacing_rows)
    by_stat = {}
    for s in summaries:
        by_stat.setdefault(s["statistic_name"], []).append(s)
    for name, entries in sorted(by_stat.items()):
        rio.write_json(out(f"{name}_N{n}.json"), entries)
    return summaries


_RATE_STATS = ("ks_distance_X2", "gap_sum_median_i2", "local_law_sup_median", "product_moment_X2_X3")


def _rate_fits(cfg, summaries):
    fits = []
    keyed = {}
    for s in summaries:
        if s["statistic_name"] in _RATE_STATS:
            key = (s["statistic_name"], s.get("time_label"), s.get("test_vector_id"))
            keyed.setdefault(key, []).append(s)
    for (name, label, tv), entries in sorted(keyed.items(), key=lambda kv: tuple(str(x) for x in kv[0])):
        pts = [(e["N"], abs(e["value"])) for e in entries]
        if len({p[0] for p in pts}) < 3 or any(p[1] <= 0 for p in pts):
            continue
        fit = fit_rate(pts)
        fits.append(
            dict(
                statistic_name=name,
                time_label=label,
                test_vector_id=tv,
                points=[[int(a), float(b)] for a, b in pts],
                exponent=fit.exponent,
                intercept=fit.intercept,
                residual=fit.residual,
            )
        )
    return fits


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentRecord:
    """Run every selected statistic for every size and write the result files.

    Result files depend only on the configuration; wall-clock data goes to
    ``run_meta.json``, which is excluded from the determinism contract.
    """
    cfg.validate()
    workers = worker_count() if workers is None else workers
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    t_start = time.time()
    summaries, files, seeds, timing = [], [], {}, {}
    for size_index, n in enumerate(cfg.sizes):
        n = int(n)
        test_vectors = [make_test_vector(kind, n, seed=cfg.base_seed) for kind in cfg.test_vectors]
        t0 = time.time()
        records = _run_size(cfg, size_index, test_vectors, workers)
        timing[str(n)] = time.time() - t0
        seeds[str(n)] = [r["seed"] for r in records]
        summaries.extend(_reduce_size(cfg, n, records, test_vectors, files, outdir))
    fits = _rate_fits(cfg, summaries)
    if fits:
        rio.write_json(outdir / "rate_fits.json", fits)
        files.append("rate_fits.json")
    record = ExperimentRecord(
        config_hash=cfg.config_hash(),
        trial_seeds=seeds,
        summaries=summaries,
        rate_fits=fits,
        wall_clock=dict(total_seconds=time.time() - t_start, per_size_seconds=timing, workers=workers),
        version=__version__,
        files=sorted(files),
    )
    rio.write_json(
        outdir / "record.json",
        dict(
            config=cfg.canonical(),
            config_hash=record.config_hash,
            trial_seeds=seeds,
            summaries=summaries,
            rate_fits=fits,
            version=record.version,
            files=record.files,
        ),
    )
    rio.write_json(
        outdir / "run_meta.json",
        dict(wall_clock=record.wall_clock, version=record.version, python=platform.python_version()),
    )
    return record
