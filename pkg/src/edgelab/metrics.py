"""Distances to the standard normal, mollified indicators, cumulants and rate fits."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special


def normal_cdf(x):
    """Standard normal distribution function via ``erfc``."""
    out = 0.5 * special.erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class EcdfSummary:
    sorted_samples: np.ndarray

    @property
    def n(self) -> int:
        return int(self.sorted_samples.size)


def ecdf_summary(samples) -> EcdfSummary:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size < 1:
        raise ValueError("need at least one sample")
    return EcdfSummary(x)


def ks_distance_to_normal(samples) -> float:
    """``sup_x |F_n(x) - Phi(x)|``, exact: both one-sided limits at every jump."""
    e = samples if isinstance(samples, EcdfSummary) else ecdf_summary(samples)
    x, n = e.sorted_samples, e.n
    f = normal_cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(f - (i - 1) / n), np.max(i / n - f)))


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov statistic and p-value."""
    from scipy.stats import ks_2samp

    res = ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(res.statistic), float(res.pvalue)


def _bump_raw(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def bump_normalization() -> float:
    """``int_{-1}^{1} exp(-1/(1-u^2)) du``."""
    val, _ = integrate.quad(lambda u: float(_bump_raw(u)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return val


def bump(u):
    """Smooth bump supported on ``[-1, 1]`` with unit integral."""
    return _bump_raw(u) / bump_normalization()


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


def _bump_tail(s):
    """``int_s^1 bump(u) du``, vectorized Gauss-Legendre (about 1e-14 accurate).

    The shorter side of ``[-1, 1]`` is integrated so the result keeps full
    relative accuracy near both ends; it is clipped to ``[0, 1]``.
    """
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    lo = np.where(s >= 0, s, -1.0)
    hi = np.where(s >= 0, 1.0, s)
    half = (hi - lo) / 2.0
    u = half[..., None] * _GL_NODES + ((hi + lo) / 2.0)[..., None]
    part = (_bump_raw(u) * _GL_WEIGHTS).sum(axis=-1) * half / bump_normalization()
    return np.clip(np.where(s >= 0, part, 1.0 - part), 0.0, 1.0)


@dataclass(frozen=True)
class Mollifier:
    """Smoothed indicator of ``A = (-inf, x]``: ``f = 1_{A_delta} * phi_delta``.

    ``f = 1`` on ``A``, ``f = 0`` off ``A_{2 delta}``, and ``0 <= f <= 1``.
    """

    delta: float
    set_boundary: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        # f(y) = int_{(y - x - delta)/delta}^{1} phi
        s = (y - self.set_boundary - self.delta) / self.delta
        out = np.where(s <= -1.0, 1.0, 0.0)
        mid = (s > -1.0) & (s < 1.0)
        if np.any(mid):
            out[mid] = _bump_tail(s[mid])
        return out[()] if out.ndim == 0 else out


def build_mollifier(x: float, delta: float) -> Mollifier:
    return Mollifier(float(delta), float(x))


def mollifier_delta(n: float, alpha: float = 5.0 / 36.0) -> float:
    """Smoothing width ``N^{-alpha}``; ``alpha = 5/36`` balances smoothing and truncation."""
    return float(n) ** (-alpha)


def smoothed_expectation_gap(samples_a, samples_b, mollifier: Mollifier) -> float:
    """``|mean f(a) - mean f(b)|`` for the mollified indicator ``f``."""
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both sample sets must be non-empty")
    return float(abs(np.mean(mollifier(a)) - np.mean(mollifier(b))))


def _power_sums(x):
    return [np.sum(x**r) for r in range(1, 5)]


def _kstats(n, s1, s2, s3, s4):
    # Fisher's k-statistics from power sums (vectorized over leave-one-out sums)
    k1 = s1 / n
    k2 = (n * s2 - s1**2) / (n * (n - 1))
    k3 = (2 * s1**3 - 3 * n * s1 * s2 + n**2 * s3) / (n * (n - 1) * (n - 2))
    k4 = (
        -6 * s1**4
        + 12 * n * s1**2 * s2
        - 3 * n * (n - 1) * s2**2
        - 4 * n * (n + 1) * s1 * s3
        + n**2 * (n + 1) * s4
    ) / (n * (n - 1) * (n - 2) * (n - 3))
    return k1, k2, k3, k4


@dataclass(frozen=True)
class Cumulants:
    values: np.ndarray  # k1..k4
    std_errors: np.ndarray
    n: int


MIN_CUMULANT_SAMPLES = 1000


def estimate_cumulants(samples, up_to_order: int = 4) -> Cumulants:
    """Unbiased k-statistics ``k_1..k_4`` with delete-one jackknife errors."""
    if up_to_order not in (1, 2, 3, 4):
        raise ValueError("cumulant order must be between 1 and 4")
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < MIN_CUMULANT_SAMPLES:
        raise ValueError(f"need at least {MIN_CUMULANT_SAMPLES} samples, got {n}")
    shift = x.mean()
    y = x - shift  # k2..k4 are shift invariant; centering avoids cancellation
    sums = _power_sums(y)
    full = np.array(_kstats(float(n), *sums))
    full[0] += shift
    loo = np.array(_kstats(float(n - 1), *(s - y ** (r + 1) for r, s in enumerate(sums))))
    se = np.sqrt((n - 1) / n * np.sum((loo - loo.mean(axis=1, keepdims=True)) ** 2, axis=1))
    return Cumulants(full[:up_to_order], se[:up_to_order], n)


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    residual: float  # RMS residual of log(statistic)


def fit_rate(points) -> RateFit:
    """Least-squares slope of ``log(statistic)`` against ``log(N)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (N, statistic) points")
    if np.any(pts[:, 1] <= 0) or np.any(pts[:, 0] <= 0):
        raise ValueError("N and the statistic must be positive for a log-log fit")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    design = np.column_stack((lx, np.ones_like(lx)))
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - design @ coef
    return RateFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))))


PROXY_LABEL = "max projected KS distance (random-projection proxy, not the convex-set distance)"


def multivariate_gaussian_distance(z, n_projections: int = 50, seed=None, directions=None) -> float:
    """Largest one-dimensional KS distance to Phi over unit projections of ``z``.

    A computable stand-in for the convex-set distance: directions are uniform on
    the sphere (seeded) unless given explicitly as rows of ``directions``.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] < 100:
        raise ValueError(f"need at least 100 trials, got {z.shape[0]}")
    if directions is None:
        v = np.random.default_rng(seed).standard_normal((n_projections, z.shape[1]))
    else:
        v = np.atleast_2d(np.asarray(directions, dtype=float))
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return max(ks_distance_to_normal(z @ d) for d in v)
