"""Test vectors, normalized eigenvector overlaps and their statistics, plus an
overlap/eigenvalue SDE integrator in spectral coordinates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralDecomposition

KINDS = ("coordinate-difference", "random-orthogonal", "indicator-set")


@dataclass(frozen=True, eq=False)
class TestVector:
    coords: np.ndarray
    kind: str
    seed: int | None = None

    __test__ = False  # not a pytest class

    @property
    def id(self) -> str:
        return self.kind if self.seed is None else f"{self.kind}:{self.seed}"


def indicator_set_size(n: int) -> int:
    """``floor(N^{3/4})``, computed without float round-off at perfect powers."""
    s = int(np.floor(n**0.75))
    while (s + 1) ** 4 <= n**3:
        s += 1
    while s**4 > n**3:
        s -= 1
    return s


def make_test_vector(kind: str, n: int, seed: int | None = None) -> TestVector:
    """Unit test vector orthogonal to the all-ones vector.

    ``coordinate-difference`` is ``(e_1 - e_2)/sqrt(2)``; ``random-orthogonal`` a
    normalized Gaussian with its mean removed; ``indicator-set`` the normalized,
    centered indicator of a seed-chosen vertex set of size ``floor(N^{3/4})``.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if kind == "coordinate-difference":
        q = np.zeros(n)
        q[0], q[1] = 1.0, -1.0
        return TestVector(q / np.sqrt(2.0), kind)
    rng = np.random.default_rng(seed)
    if kind == "random-orthogonal":
        q = rng.standard_normal(n)
    elif kind == "indicator-set":
        q = np.zeros(n)
        q[rng.choice(n, size=indicator_set_size(n), replace=False)] = 1.0
    else:
        raise ValueError(f"unknown test vector kind {kind!r}; expected one of {KINDS}")
    q -= q.mean()
    q -= q.mean()
    return TestVector(q / np.linalg.norm(q), kind, seed)


@dataclass(frozen=True, eq=False)
class OverlapSample:
    indices: np.ndarray
    values: np.ndarray
    test_vector_id: str
    seed: object = None
    flagged: bool = False

    def value(self, index: int) -> float:
        pos = np.flatnonzero(self.indices == index)
        if pos.size == 0:
            raise KeyError(index)
        return float(self.values[pos[0]])


def compute_overlaps(sd: SpectralDecomposition, q, indices, seed=None) -> OverlapSample:
    """``X_i = sqrt(N) <q, u_i>`` for 1-based ``indices``, each with a random sign.

    Eigenvector signs are arbitrary, so every eigenvector is multiplied by an
    independent uniform +-1 drawn from ``seed``.  Requesting index 1 (the
    constraint direction) returns 0 and sets ``flagged``.
    """
    tv_id = q.id if isinstance(q, TestVector) else "custom"
    q = np.asarray(q.coords if isinstance(q, TestVector) else q, dtype=float)
    indices = np.atleast_1d(np.asarray(indices, dtype=int))
    if np.any(indices < 1) or np.any(indices > sd.eigenvalues.size):
        raise ValueError("overlap indices out of range for this decomposition")
    n = sd.source_dim
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=indices.size) * 2 - 1
    values = np.sqrt(n) * (sd.eigenvectors[:, indices - 1].T @ q) * signs
    flagged = False
    if np.any(indices == 1):
        values[indices == 1] = 0.0
        flagged = True
    return OverlapSample(indices, values, tv_id, seed, flagged)


def overlap_column(samples, index: int | None = None) -> np.ndarray:
    """Values of one index across trials; plain arrays pass through."""
    if isinstance(samples, np.ndarray):
        return samples.astype(float)
    samples = list(samples)
    if samples and isinstance(samples[0], OverlapSample):
        if index is None:
            raise ValueError("index is required for OverlapSample input")
        return np.array([s.value(index) for s in samples])
    return np.asarray(samples, dtype=float)


def _jackknife_raw_moment(x, k):
    n = x.size
    s = np.sum(x**k)
    loo = (s - x**k) / (n - 1)
    return s / n, np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    second: float
    fourth: float
    se_mean: float
    se_second: float
    se_fourth: float
    n: int


MIN_TRIALS = 100


def estimate_moments(samples, index: int | None = None, min_trials: int = MIN_TRIALS) -> MomentEstimate:
    """Plug-in ``E[X], E[X^2], E[X^4]`` with delete-one jackknife standard errors."""
    x = overlap_column(samples, index)
    if x.size < max(min_trials, 2):
        raise ValueError(f"need at least {min_trials} trials, got {x.size}")
    m1, s1 = _jackknife_raw_moment(x, 1)
    m2, s2 = _jackknife_raw_moment(x, 2)
    m4, s4 = _jackknife_raw_moment(x, 4)
    return MomentEstimate(m1, m2, m4, s1, s2, s4, int(x.size))


@dataclass(frozen=True)
class Decorrelation:
    product_moment: float  # E[X_i X_j]
    std_error: float
    correlation: float  # Pearson correlation


def estimate_decorrelation(samples, i=None, j=None, *, other=None) -> Decorrelation:
    """Empirical ``E[X_i X_j]`` and its standard error.

    Pass a collection of :class:`OverlapSample` with two distinct indices, or
    two aligned arrays as ``(samples, other=...)``.
    """
    if other is None:
        if i is None or j is None or i == j:
            raise ValueError("need two distinct indices (use estimate_moments for i == j)")
        if min(i, j) < 2:
            raise ValueError("overlap indices must be >= 2")
        xi, xj = overlap_column(samples, i), overlap_column(samples, j)
    else:
        xi, xj = overlap_column(samples), overlap_column(other)
    if xi.size < MIN_TRIALS or xi.size != xj.size:
        raise ValueError(f"need two aligned series of at least {MIN_TRIALS} trials")
    prod = xi * xj
    corr = float(np.corrcoef(xi, xj)[0, 1]) if xi.std() > 0 and xj.std() > 0 else float("nan")
    return Decorrelation(float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(prod.size)), corr)


@dataclass(frozen=True)
class JointCovariance:
    matrix: np.ndarray  # E[Z Z^T]
    deviation: float  # operator norm of matrix - I
    rank_deficient: bool


def joint_overlap_matrix(samples, indices, test_vector_ids=None) -> np.ndarray:
    """Stack per-trial overlaps into the ``(trials, m*K)`` matrix ``Z_N``.

    ``samples`` is a list of per-trial lists (one :class:`OverlapSample` per test
    vector); columns run over test vectors, then indices.
    """
    rows = []
    for trial in samples:
        trial = [trial] if isinstance(trial, OverlapSample) else list(trial)
        if test_vector_ids is not None:
            by_id = {s.test_vector_id: s for s in trial}
            trial = [by_id[t] for t in test_vector_ids]
        rows.append([s.value(i) for s in trial for i in indices])
    return np.array(rows, dtype=float)


def joint_covariance(z: np.ndarray) -> JointCovariance:
    """Second-moment matrix of ``Z_N`` and its operator-norm distance to the identity."""
    z = np.asarray(z, dtype=float)
    trials, dim = z.shape
    if trials < 10 * dim:
        raise ValueError(f"need at least 10*mK = {10 * dim} trials, got {trials}")
    cov = z.T @ z / trials
    dev = float(np.linalg.norm(cov - np.eye(dim), 2))
    return JointCovariance(cov, dev, bool(np.linalg.matrix_rank(z) < dim))


@dataclass(frozen=True)
class Delocalization:
    sup_norm: float
    mass_deviation: float
    set_size: int


def delocalization_stats(u, seed=None, set_size: int | None = None) -> Delocalization:
    """``||u||_inf`` and ``|sum_{v in S} u(v)^2 - |S|/N|`` for a random set ``S``.

    ``u`` is an eigenvector or a :class:`SpectralDecomposition` (then ``u_2`` is
    used).  ``S`` has size ``floor(N^{3/4})`` unless ``set_size`` is given.
    """
    if isinstance(u, SpectralDecomposition):
        u = u.eigenvector(2)
    u = np.asarray(u, dtype=float)
    n = u.size
    size = indicator_set_size(n) if set_size is None else int(set_size)
    s = np.random.default_rng(seed).choice(n, size=size, replace=False)
    mass = float(np.sum(u[s] ** 2))
    return Delocalization(float(np.max(np.abs(u))), abs(mass - size / n), size)


@dataclass
class OverlapTrajectory:
    times: np.ndarray
    overlaps: np.ndarray  # (n_records, ..., M)
    eigenvalues: np.ndarray  # (n_records, ..., M)
    aborted: np.ndarray  # bool, batch shape
    fluctuation_scale: float = field(default=0.0)

    @property
    def final_overlaps(self) -> np.ndarray:
        return self.overlaps[-1]


def step_fluctuation_scale(n: int, dt: float) -> float:
    """Per-step eigenvalue noise size ``sqrt(2 dt / N)``."""
    return float(np.sqrt(2.0 * dt / n))


def _close_pairs(lam, threshold):
    """Adjacent pairs ``(i, i+1)`` with gap below ``threshold``, no two sharing an index.

    Within a run of close pairs the locally smallest gaps are kept.
    """
    gap = lam[:, :-1] - lam[:, 1:]
    flag = gap < threshold
    left = np.zeros_like(flag)
    left[:, 1:] = flag[:, :-1] & (gap[:, :-1] <= gap[:, 1:])
    right = np.zeros_like(flag)
    right[:, :-1] = flag[:, 1:] & (gap[:, 1:] < gap[:, :-1])
    return flag & ~left & ~right


def _sde_step(x, lam, dt, n, noise, form, rng, iu, eye, split=None):
    """One Euler-Maruyama step for a batch; ``dt`` has shape ``(batch,)``.

    ``split`` marks adjacent pairs whose mutual interaction is integrated by
    diagonalizing the 2x2 block ``[[l_i, b], [b, l_j]]`` (``b`` the pair's
    off-diagonal increment) and rotating ``(X_i, X_j)`` accordingly.  To leading
    order this reproduces the singular drift, rotation and Ito terms of the pair
    without dividing by its gap.
    """
    b, m = x.shape
    diff = lam[:, :, None] - lam[:, None, :]
    diff[:, eye] = np.inf
    inv = 1.0 / diff
    if split is not None:
        tb, ti = np.nonzero(split)
        inv[tb, ti, ti + 1] = 0.0
        inv[tb, ti + 1, ti] = 0.0
    dtc = dt[:, None]
    new_l = lam + (-0.5 * lam + inv.sum(axis=2) / n) * dtc
    if form == "flow":
        ito = (inv**2).sum(axis=2) / n * dtc
    else:
        ito = dtc
    drift_x = -0.5 * x * ito
    if not noise:
        new_x = x + drift_x
    elif form == "flow":
        sq = np.sqrt(dtc)
        new_l += np.sqrt(2.0 / n) * sq * rng.standard_normal((b, m))
        db = np.zeros((b, m, m))
        db[:, iu[0], iu[1]] = rng.standard_normal((b, iu[0].size))
        db += np.swapaxes(db, 1, 2)
        if split is not None:
            # second-order rotation: realized squared angles replace their
            # mean in the Ito term, so every pair turns by a map that is
            # orthogonal up to third order
            drift_x = -0.5 * x * ((inv * db) ** 2).sum(axis=2) / n * dtc
        new_x = x + drift_x + np.einsum("bij,bij,bj->bi", inv, db, x) * (sq / np.sqrt(n))
    else:
        sq = np.sqrt(dtc)
        new_l += np.sqrt(2.0 / n) * sq * rng.standard_normal((b, m))
        db = rng.standard_normal((b, m, m))
        coupling = (x[:, None, :] - x[:, :, None]) * inv
        new_x = x + drift_x + np.einsum("bij,bij->bi", coupling, db) * sq
    if split is not None and tb.size:
        off = db[tb, ti, ti + 1] * np.sqrt(dt[tb] / n) if noise else np.zeros(tb.size)
        a, c = new_l[tb, ti], new_l[tb, ti + 1]
        mean, half = (a + c) / 2.0, (a - c) / 2.0
        r = np.hypot(half, off)
        phi = 0.5 * np.arctan2(off, half)
        cs, sn = np.cos(phi), np.sin(phi)
        xi, xj = new_x[tb, ti], new_x[tb, ti + 1]
        new_x[tb, ti], new_x[tb, ti + 1] = cs * xi + sn * xj, cs * xj - sn * xi
        new_l[tb, ti], new_l[tb, ti + 1] = mean + r, mean - r
    return new_x, new_l


def _min_gap(lam):
    if lam.shape[1] < 2:
        return np.full(lam.shape[0], np.inf)
    return np.min(lam[:, :-1] - lam[:, 1:], axis=1)


def simulate_overlap_sde(
    x0,
    lam0,
    t_max: float,
    n_steps: int,
    seed=None,
    *,
    n: int | None = None,
    noise: bool = True,
    form: str = "flow",
    record_every: int | None = None,
    gap_factor: float = 10.0,
    pair_split: bool = False,
):
    """Euler-Maruyama for overlaps ``X_i`` and eigenvalues ``lambda_i``, ``i >= 2``.

    ``x0`` and ``lam0`` hold the non-constraint overlaps and eigenvalues in
    descending eigenvalue order; a leading batch axis runs independent trials.
    ``n`` is the matrix dimension (defaults to ``M + 1``).

    Eigenvalues follow the beta=1 Dyson equation with OU drift,
    ``d lambda_i = (-lambda_i/2 + N^{-1} sum_j 1/(lambda_i - lambda_j)) dt + sqrt(2/N) dB_ii``.

    ``form="flow"``: overlaps follow the eigenvector flow generated by the
    matrix dynamics,
    ``dX_i = N^{-1/2} sum_j X_j dB_ij / (lambda_i - lambda_j) - (2N)^{-1} X_i sum_j (lambda_i - lambda_j)^{-2} dt``
    with symmetric ``B_ij = B_ji``.

    ``form="printed"``: ``dX_i = sum_j (X_j - X_i)/(lambda_i - lambda_j) dB_ij - X_i/2 dt``
    with independent standard ``B_ij`` for every ordered pair.

    ``noise=False`` switches the martingale terms off.  With ``s`` the
    per-step fluctuation scale (:func:`step_fluctuation_scale`), trials whose
    initial minimum gap is at most ``gap_factor * s``, or whose gaps later fall
    to ``s`` or below, are frozen and marked in ``aborted``.

    ``pair_split=True`` (flow form only) instead integrates every adjacent pair
    closer than ``gap_factor * s`` through its exact 2x2 block (see
    :func:`_sde_step`).  No initial gap condition is imposed and a trial is
    aborted only if eigenvalues cross.  Beta=1 gaps approach zero often enough
    that plain Euler loses most full-spectrum trials within a short time.
    """
    if form not in ("flow", "printed"):
        raise ValueError(f"unknown form {form!r}")
    if pair_split and form != "flow":
        raise ValueError("pair splitting is implemented for the flow form only")
    if n_steps < 1 or not t_max > 0:
        raise ValueError("need n_steps >= 1 and t_max > 0")
    x = np.array(x0, dtype=float, ndmin=1)
    lam = np.array(lam0, dtype=float, ndmin=1)
    if x.shape != lam.shape:
        raise ValueError("overlaps and eigenvalues must have the same shape")
    squeeze = x.ndim == 1
    if squeeze:
        x, lam = x[None], lam[None]
    batch, m = x.shape
    n = m + 1 if n is None else int(n)
    dt = t_max / n_steps
    scale = step_fluctuation_scale(n, dt)
    rng = np.random.default_rng(seed)
    record_every = n_steps if record_every is None else int(record_every)
    iu = np.triu_indices(m, 1)
    eye = np.eye(m, dtype=bool)
    if pair_split:
        aborted = _min_gap(lam) <= 0
        floor = 0.0
    else:
        aborted = _min_gap(lam) <= gap_factor * scale
        floor = scale
    times, xs, lams = [0.0], [x.copy()], [lam.copy()]
    for k in range(1, n_steps + 1):
        live = ~aborted
        if not live.any():
            break
        xl, ll = x[live], lam[live]
        split = _close_pairs(ll, gap_factor * scale) if pair_split and m > 1 else None
        new_x, new_l = _sde_step(xl, ll, np.full(xl.shape[0], dt), n, noise, form, rng, iu, eye, split)
        x[live], lam[live] = new_x, new_l
        collapsed = np.zeros(batch, dtype=bool)
        collapsed[live] = _min_gap(new_l) <= floor
        aborted |= collapsed
        if k % record_every == 0 or k == n_steps:
            times.append(k * dt)
            xs.append(x.copy())
            lams.append(lam.copy())
    if len(times) == 1 or times[-1] != n_steps * dt:
        times.append(n_steps * dt)
        xs.append(x.copy())
        lams.append(lam.copy())
    xs, lams = np.array(xs), np.array(lams)
    if squeeze:
        xs, lams, aborted = xs[:, 0], lams[:, 0], aborted[0]
    return OverlapTrajectory(np.array(times), xs, lams, aborted, scale)
