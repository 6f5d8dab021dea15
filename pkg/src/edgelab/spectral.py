"""Eigendecompositions with the constraint eigenpair pinned first, and
resolvent-based statistics near the spectral edge.

Index conventions follow the usual 1-based labels: position 0 of every array
holds the constraint pair (eigenvalue 0, eigenvector ``e/sqrt(N)``), and
position ``k-1`` holds ``lambda_k`` for ``k >= 2`` in descending order.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .ensemble import write_matrix


class EigensolverError(RuntimeError):
    """The eigensolver failed; ``dump_path`` holds the offending matrix."""

    def __init__(self, message, dump_path=None):
        super().__init__(message if dump_path is None else f"{message} (matrix dumped to {dump_path})")
        self.dump_path = dump_path


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs ordered as ``[constraint, lambda_2 >= lambda_3 >= ...]``.

    ``eigenvectors`` has one column per eigenvalue and may be ``None`` when only
    eigenvalues were computed.  A partial decomposition (``len(eigenvalues) <
    source_dim``) holds the constraint pair plus the top of the spectrum.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    source_dim: int

    @property
    def is_complete(self) -> bool:
        return self.eigenvalues.shape[0] == self.source_dim

    def eigenvalue(self, k: int) -> float:
        """``lambda_k`` with 1-based ``k``."""
        return float(self.eigenvalues[k - 1])

    def eigenvector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k - 1]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T


def _dump_and_raise(m, exc):
    fd, path = tempfile.mkstemp(prefix="edgelab-eig-", suffix=".txt")
    with os.fdopen(fd, "w") as fh:
        write_matrix(m, fh)
    raise EigensolverError(f"eigensolver failed: {exc}", path) from exc


def _pin_and_order(values, vectors, n):
    overlap = np.abs(vectors.sum(axis=0)) / np.sqrt(n)
    pin = int(np.argmax(overlap))
    rest = np.delete(np.arange(values.size), pin)
    # descending eigenvalue, ties by ascending original index
    rest = rest[np.lexsort((rest, -values[rest]))]
    order = np.concatenate(([pin], rest))
    return order


def decompose(m: np.ndarray) -> SpectralDecomposition:
    """Full decomposition; the eigenvector most aligned with ``e`` goes first."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        _dump_and_raise(m, exc)
    order = _pin_and_order(values, vectors, n)
    return SpectralDecomposition(values[order], vectors[:, order], n)


def decompose_values(m: np.ndarray) -> SpectralDecomposition:
    """Eigenvalues only, with the constraint eigenvalue pinned first.

    The constraint eigenvalue is located as the eigenvalue of ``m`` closest to
    the Rayleigh quotient of ``e``, which is exact when ``m e = 0``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    try:
        values = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        _dump_and_raise(m, exc)
    target = m.sum() / n
    pin = int(np.argmin(np.abs(values - target)))
    rest = np.delete(np.arange(n), pin)
    rest = rest[np.lexsort((rest, -values[rest]))]
    return SpectralDecomposition(values[np.concatenate(([pin], rest))], None, n)


def top_eigenpairs(m, k: int, seed=0) -> SpectralDecomposition:
    """Constraint pair plus the ``k`` largest eigenpairs ``lambda_2..lambda_{k+1}``.

    ``m`` is a dense centered matrix or a ``LinearOperator`` (e.g. the sparse
    centered adjacency).  Uses Lanczos iteration with a seeded start vector, so
    the result is deterministic.  The constraint pair is inserted exactly
    rather than computed.
    """
    from scipy.sparse.linalg import eigsh

    n = m.shape[0]
    if k < 1 or k + 1 >= n:
        raise ValueError(f"need 1 <= k < n-1, got k={k}, n={n}")
    v0 = np.random.default_rng(seed).standard_normal(n)
    v0 -= v0.mean()
    try:
        values, vectors = eigsh(m, k=k, which="LA", v0=v0, tol=0, ncv=min(n, max(2 * k + 1, 20)))
    except Exception as exc:  # ARPACK raises its own error types
        if isinstance(m, np.ndarray):
            _dump_and_raise(m, exc)
        raise EigensolverError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((np.arange(k), -values))
    e = np.full((n, 1), 1.0 / np.sqrt(n))
    return SpectralDecomposition(
        np.concatenate(([0.0], values[order])),
        np.hstack((e, vectors[:, order])),
        n,
    )


def m_sc(z):
    """Semicircle Stieltjes transform: the root of ``m^2 + z m + 1 = 0`` in the upper half plane."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("m_sc is defined for Im z > 0")
    s = np.sqrt(z * z - 4.0)
    m1 = (-z + s) / 2.0
    m2 = (-z - s) / 2.0
    out = np.where(m1.imag > 0, m1, m2)
    return out[()] if out.ndim == 0 else out


def m_kesten_mckay(z, d: int):
    """Root Green function of the infinite d-regular tree, scaled by ``1/sqrt(d-1)``.

    ``1 / (-z - d/(d-1) m_sc(z))``; the diagonal resolvent entries of a random
    d-regular graph concentrate around this value at fixed d, and it tends to
    ``m_sc`` as ``d`` grows.
    """
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    z = np.asarray(z, dtype=complex)
    out = 1.0 / (-z - d / (d - 1.0) * m_sc(z))
    return out[()] if out.ndim == 0 else out


def _check_test_vector(q, n):
    q = np.asarray(q, dtype=float)
    if q.shape != (n,):
        raise ValueError(f"test vector has shape {q.shape}, expected ({n},)")
    if abs(np.linalg.norm(q) - 1.0) > 1e-10:
        raise ValueError("test vector must have unit norm")
    if abs(q.sum()) > 1e-10 * np.sqrt(n):
        raise ValueError("test vector must be orthogonal to the all-ones vector")
    return q


def spectral_weights(sd: SpectralDecomposition, q) -> np.ndarray:
    """``|<q, u_i>|^2`` for every stored eigenvector."""
    q = _check_test_vector(q, sd.source_dim)
    return (sd.eigenvectors.T @ q) ** 2


def resolvent_quadratic_form(sd: SpectralDecomposition, q, z):
    """``<q, (H - z)^{-1} q> = sum_i |<q,u_i>|^2 / (lambda_i - z)``, vectorized over ``z``."""
    if not sd.is_complete:
        raise ValueError("the resolvent needs a complete decomposition")
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("z must lie in the upper half plane")
    w = spectral_weights(sd, q)
    out = (w / (sd.eigenvalues - z[..., None])).sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def ward_sum(sd: SpectralDecomposition, q, z):
    """``sum_i |<q,u_i>|^2 eta / |lambda_i - z|^2``, which equals ``Im <q, G(z) q>``."""
    z = np.asarray(z, dtype=complex)
    w = spectral_weights(sd, q)
    return (w * z.imag[..., None] / np.abs(sd.eigenvalues - z[..., None]) ** 2).sum(axis=-1)


def edge_grid(n: int, epsilon: float, n_energies: int = 5, n_etas: int = 10):
    """Energies spanning ``|E-2| <= N^{-2/3+eps}`` and a geometric eta grid on ``[N^{-2/3}, 1]``."""
    width = float(n) ** (-2.0 / 3.0 + epsilon)
    energies = 2.0 + np.linspace(-width, width, n_energies)
    etas = np.geomspace(float(n) ** (-2.0 / 3.0), 1.0, n_etas)
    return energies, etas


@dataclass(frozen=True)
class LocalLawProfile:
    energies: np.ndarray
    etas: np.ndarray
    deviation: np.ndarray  # shape (len(energies), len(etas))

    @property
    def supremum(self) -> float:
        return float(self.deviation.max())

    def rows(self):
        for a, e in enumerate(self.energies):
            for b, eta in enumerate(self.etas):
                yield float(e), float(eta), float(self.deviation[a, b])


def local_law_deviation_profile(sd, q, energies, etas, epsilon: float, reference=None) -> LocalLawProfile:
    """``|<q,G(z)q> - m_sc(z)|`` on the grid ``z = E + i eta`` in the edge regime.

    ``reference`` optionally replaces ``m_sc`` by another callable of ``z``, e.g.
    ``lambda z: m_kesten_mckay(z, 3)``.

    Raises ``ValueError`` naming the violated constraint when a grid point lies
    outside ``|E-2| <= N^{-2/3+eps}``, ``N^{-2/3} <= eta <= 1``.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if energies.size == 0 or etas.size == 0:
        raise ValueError("energy and eta grids must be non-empty")
    n = sd.source_dim
    width = float(n) ** (-2.0 / 3.0 + epsilon)
    eta_min = float(n) ** (-2.0 / 3.0)
    slack = 1e-12
    if np.any(np.abs(energies - 2.0) > width * (1 + slack)):
        raise ValueError(f"energy grid violates |E-2| <= N^(-2/3+eps) = {width:.6g}")
    if np.any(etas < eta_min * (1 - slack)):
        raise ValueError(f"eta grid violates eta >= N^(-2/3) = {eta_min:.6g}")
    if np.any(etas > 1.0 + slack):
        raise ValueError("eta grid violates eta <= 1")
    z = energies[:, None] + 1j * etas[None, :]
    ref = m_sc if reference is None else reference
    dev = np.abs(resolvent_quadratic_form(sd, q, z) - ref(z))
    return LocalLawProfile(energies, etas, dev)


def edge_spacing_profile(sd: SpectralDecomposition, k_max: int) -> np.ndarray:
    """Rows ``(k, 2 - lambda_{k+1})`` for ``k = 1..k_max``."""
    if k_max > sd.source_dim / 10:
        raise ValueError(f"k_max must be <= N/10 = {sd.source_dim / 10}")
    if k_max + 1 > sd.eigenvalues.size:
        raise ValueError("decomposition does not hold enough eigenvalues")
    k = np.arange(1, k_max + 1)
    return np.column_stack((k, 2.0 - sd.eigenvalues[k]))


@dataclass(frozen=True)
class GapSum:
    value: float
    degenerate: bool


DEGENERATE_GAP = 1e-12


def gap_sum_statistic(sd: SpectralDecomposition, i: int) -> GapSum:
    """``sum_{j >= 2, j != i} (lambda_i - lambda_j)^{-2}``.

    A gap below ``1e-12`` is reported as a degenerate event (``value`` is nan)
    instead of raising.
    """
    if i < 2:
        raise ValueError("gap sums are defined for i >= 2")
    if not sd.is_complete:
        raise ValueError("the gap sum needs the complete spectrum")
    lam = sd.eigenvalues[1:]
    gaps = lam[i - 2] - np.delete(lam, i - 2)
    if np.any(np.abs(gaps) < DEGENERATE_GAP):
        return GapSum(float("nan"), True)
    return GapSum(float(np.sum(gaps**-2.0)), False)
