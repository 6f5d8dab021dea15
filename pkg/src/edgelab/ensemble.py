"""Centered adjacency matrices, constrained GOE and constrained Dyson Brownian motion.

Every matrix produced here is a dense symmetric ``ndarray`` whose rows sum to
zero (the all-ones vector lies in its kernel).  Symmetry is exact: results are
assembled from the upper triangle and mirrored.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import RegularGraph, adjacency_matrix, audit_regularity

ROW_SUM_RTOL = 1e-10


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def mirror_upper(m: np.ndarray) -> np.ndarray:
    """Symmetric matrix built from the upper triangle of ``m``."""
    upper = np.triu(m)
    return upper + np.triu(upper, 1).T


def max_row_sum(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.sum(axis=-1))))


def is_centered(m: np.ndarray, rtol: float = ROW_SUM_RTOL) -> bool:
    """Exact symmetry and row sums within ``rtol * dim``."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.array_equal(m, m.T) and max_row_sum(m) <= rtol * m.shape[0])


def build_centered_adjacency(g: RegularGraph) -> np.ndarray:
    """``A/sqrt(d-1) - (d/sqrt(d-1)) ee^T/N`` for a d-regular graph."""
    if g.degree < 3:
        raise ValueError(f"degree must be >= 3, got {g.degree}")
    if not audit_regularity(g):
        raise ValueError("graph fails the regularity audit")
    n, d = g.n_vertices, g.degree
    scale = 1.0 / np.sqrt(d - 1)
    h = adjacency_matrix(g, sparse=False) * scale
    h -= d * scale / n
    return h


def centered_adjacency_operator(g: RegularGraph):
    """The centered adjacency as a sparse ``LinearOperator`` (matvec in O(Nd))."""
    from scipy.sparse.linalg import LinearOperator

    if g.degree < 3:
        raise ValueError(f"degree must be >= 3, got {g.degree}")
    n, d = g.n_vertices, g.degree
    scale = 1.0 / np.sqrt(d - 1)
    a = adjacency_matrix(g) * scale
    shift = d * scale

    def matvec(x):
        x = np.asarray(x)
        return a @ x - shift * x.mean(axis=0)

    return LinearOperator((n, n), matvec=matvec, rmatvec=matvec, dtype=float)


def project_to_constraint(m: np.ndarray) -> np.ndarray:
    """``P m P`` with ``P = I - ee^T/N``; identity on already-centered input."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValueError("input matrix is not symmetric")
    r = m.mean(axis=1)
    out = m - r[:, None] - r[None, :] + r.mean()
    return mirror_upper(out)


def _goe_batch(n: int, size: int, rng) -> np.ndarray:
    # off-diagonal variance 1/n, diagonal 2/n
    g = rng.standard_normal((size, n, n))
    g += np.swapaxes(g, 1, 2)
    g *= 1.0 / np.sqrt(2.0 * n)
    return g


def _project_batch(g: np.ndarray) -> np.ndarray:
    r = g.mean(axis=2)
    s = r.mean(axis=1)
    # r_i + r_j is commutative, so the result stays exactly symmetric
    return g - (r[:, :, None] + r[:, None, :]) + s[:, None, None]


def sample_constrained_goe(n: int, seed=None) -> np.ndarray:
    """One draw of ``P G P`` with ``G`` a GOE matrix (off-diag var 1/N, diag 2/N)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = _as_rng(seed)
    return _project_batch(_goe_batch(n, 1, rng))[0]


def sample_constrained_goe_batch(n: int, size: int, seed=None) -> np.ndarray:
    """``size`` independent constrained GOE matrices stacked on axis 0."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return _project_batch(_goe_batch(n, size, _as_rng(seed)))


def constrained_goe_covariance(i, j, k, l, n: int):
    """``E[W_ij W_kl]`` for the constrained GOE.

    Equals ``(P_ik P_jl + P_il P_jk) / N`` with ``P = I - ee^T/N``.
    """
    i, j, k, l = (np.asarray(a) for a in (i, j, k, l))
    # float deltas: numpy bools add as logical or
    dik, djl, dil, djk = ((a == b).astype(float) for a, b in ((i, k), (j, l), (i, l), (j, k)))
    return (
        dik * djl + dil * djk - (dik + djl + dil + djk) / n + 2.0 / n**2
    ) / n


def constrained_increment_covariance(i, j, k, l, n: int):
    """Per-unit-time ``E[dW_ij dW_kl]`` in the unsymmetrized form ``P_ik P_jl``.

    The covariance of the symmetric noise is the symmetrization
    ``P_ik P_jl + P_il P_jk`` of this expression.
    """
    i, j, k, l = (np.asarray(a) for a in (i, j, k, l))
    dik, djl = (i == k).astype(float), (j == l).astype(float)
    return dik * djl - (dik + djl) / n + 1.0 / n**2


def critical_time(n: int, epsilon: float) -> float:
    """``t* = N^(-1/3 + eps)``."""
    return float(n) ** (-1.0 / 3.0 + epsilon)


def ou_coefficients(t: float) -> tuple[float, float]:
    """``(e^{-t/2}, sqrt(1 - e^{-t}))``: weights of the initial matrix and the noise."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return float(np.exp(-t / 2.0)), float(np.sqrt(-np.expm1(-t)))


def evolve_exact(h0: np.ndarray, t: float, seed=None, noise: np.ndarray | None = None):
    """Sample ``H_t = e^{-t/2} H_0 + sqrt(1 - e^{-t}) W`` exactly in law.

    ``noise`` may supply the constrained GOE matrix ``W``; otherwise it is drawn
    from ``seed``.
    """
    a, b = ou_coefficients(t)
    if t == 0:
        return np.array(h0, dtype=float, copy=True)
    h0 = np.asarray(h0, dtype=float)
    w = sample_constrained_goe(h0.shape[0], seed) if noise is None else noise
    return mirror_upper(a * h0 + b * w)


def decomposition_remainder(h0: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
    """``R = H_t - (H_0 - (t/2) H_0 + sqrt(t) W)`` for the exact ``H_t`` built from ``w``."""
    a, b = ou_coefficients(t)
    return (a - 1.0 + t / 2.0) * h0 + (b - np.sqrt(t)) * w


@dataclass
class CdbmPath:
    times: np.ndarray
    states: list = field(repr=False)
    seed: object = None


def _increments(n: int, n_steps: int, seed):
    rng = _as_rng(seed)
    for _ in range(n_steps):
        yield sample_constrained_goe(n, rng)


def evolve_path(
    h0: np.ndarray,
    t_max: float,
    n_steps: int,
    seed=None,
    record_every: int = 1,
    scheme: str = "euler",
) -> CdbmPath:
    """Pathwise integration of ``dH = -H/2 dt + N^{-1/2} dW`` on the constrained space.

    ``scheme="euler"`` is Euler-Maruyama, ``H += -H/2 dt + sqrt(dt) W_k`` with
    ``W_k`` a fresh constrained GOE draw.  ``scheme="exact"`` uses the same
    increments through the exact one-step OU transition, which gives a coupled
    reference path for strong-error measurements.  States are recorded every
    ``record_every`` steps plus the final one.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if scheme not in ("euler", "exact"):
        raise ValueError(f"unknown scheme {scheme!r}")
    h = np.array(h0, dtype=float, copy=True)
    n = h.shape[0]
    dt = t_max / n_steps
    if scheme == "euler":
        a, b = 1.0 - dt / 2.0, np.sqrt(dt)
    else:
        a, b = ou_coefficients(dt)
    times, states = [0.0], [h.copy()]
    for k, w in enumerate(_increments(n, n_steps, seed), start=1):
        h = mirror_upper(a * h + b * w)
        if k % record_every == 0 or k == n_steps:
            times.append(k * dt)
            states.append(h.copy())
    return CdbmPath(np.array(times), states, seed)


def spectral_moments(m: np.ndarray, orders=(1, 2, 3, 4)) -> np.ndarray:
    """Moments ``tr(m^k)/N`` of the empirical spectral distribution."""
    ev = np.linalg.eigvalsh(m)
    return np.array([np.mean(ev**k) for k in orders])


def write_matrix(m: np.ndarray, path_or_file) -> None:
    """Text dump: dimension line, then rows of 17-significant-digit entries."""
    m = np.asarray(m)
    lines = [str(m.shape[0])]
    lines.extend(" ".join(f"{x:.17g}" for x in row) for row in m)
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_matrix(path_or_file) -> np.ndarray:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n = int(lines[0])
    m = np.array([[float(x) for x in ln.split()] for ln in lines[1 : n + 1]])
    if m.shape != (n, n):
        raise ValueError(f"matrix dump declares {n}x{n} but holds {m.shape}")
    return m
