"""Uniform random d-regular graphs via the pairing (configuration) model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """A simple d-regular graph stored as a canonical edge list.

    ``edges`` is an ``(m, 2)`` integer array with ``u < v`` in every row and rows
    sorted lexicographically. The constructor does not validate; use
    :func:`audit_regularity`.
    """

    n_vertices: int
    degree: int
    edges: np.ndarray

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def __eq__(self, other):
        if not isinstance(other, RegularGraph):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and self.degree == other.degree
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None


def canonical_edges(pairs) -> np.ndarray:
    """Order each pair as (small, large) and sort rows lexicographically."""
    e = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    e = np.sort(e, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return e[order]


def from_edges(n_vertices: int, degree: int, pairs) -> RegularGraph:
    return RegularGraph(int(n_vertices), int(degree), canonical_edges(pairs))


def _check_parameters(n: int, d: int) -> None:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if d < 3:
        raise ValueError(f"degree must be >= 3, got {d}")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even (handshake lemma), got n={n}, d={d}")
    if n <= d:
        raise ValueError(f"need n > d, got n={n}, d={d}")


def sample_regular_graph(n: int, d: int, seed: int) -> RegularGraph:
    """Sample a uniformly random simple d-regular graph on ``n`` vertices.

    Stubs are paired by a uniform random permutation; the whole pairing is
    rejected and redrawn whenever it contains a loop or a repeated edge, which
    makes the accepted graph exactly uniform over simple d-regular graphs.
    The output depends only on ``(n, d, seed)``.
    """
    _check_parameters(n, d)
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    while True:
        pairs = np.sort(rng.permutation(stubs).reshape(-1, 2), axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = pairs[:, 0] * n + pairs[:, 1]
        keys.sort()
        if np.any(keys[1:] == keys[:-1]):
            continue
        edges = np.column_stack((keys // n, keys % n))
        return RegularGraph(n, d, edges)


def audit_regularity(g: RegularGraph) -> bool:
    """True iff ``g`` is a simple graph with every degree equal to ``g.degree``."""
    n, d = g.n_vertices, g.degree
    if n < 1 or d < 0 or (n * d) % 2:
        return False
    e = np.asarray(g.edges)
    if e.ndim != 2 or e.shape[1] != 2 or e.shape[0] != n * d // 2:
        return False
    if e.size and (e.min() < 0 or e.max() >= n):
        return False
    if np.any(e[:, 0] == e[:, 1]):
        return False
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    if np.unique(lo * n + hi).size != e.shape[0]:
        return False
    return bool(np.all(np.bincount(e.ravel(), minlength=n) == d))


def adjacency_matrix(g: RegularGraph, sparse: bool = True):
    """Symmetric 0/1 adjacency matrix (CSR by default, dense on request)."""
    n = g.n_vertices
    u, v = g.edges[:, 0], g.edges[:, 1]
    if not sparse:
        a = np.zeros((n, n))
        a[u, v] = 1.0
        a[v, u] = 1.0
        return a
    import scipy.sparse as sp

    rows = np.concatenate((u, v))
    cols = np.concatenate((v, u))
    return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))


def write_edge_list(g: RegularGraph, path_or_file) -> None:
    """Write ``"n d"`` then one ``"u v"`` line per edge (u < v, sorted)."""
    lines = [f"{g.n_vertices} {g.degree}"]
    lines.extend(f"{int(u)} {int(v)}" for u, v in canonical_edges(g.edges))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_edge_list(path_or_file) -> RegularGraph:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError("edge list must start with a 'n d' header line")
    n, d = int(rows[0][0]), int(rows[0][1])
    pairs = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64)
    return from_edges(n, d, pairs.reshape(-1, 2))
