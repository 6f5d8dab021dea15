# %% [markdown]
# Random cubic graphs and the constrained matrix flow.
#
# Sample a graph, center its adjacency matrix, then push it along the
# Ornstein-Uhlenbeck flow that keeps every row sum at zero.

# %%
import numpy as np

from edgelab import (
    build_centered_adjacency,
    critical_time,
    evolve_exact,
    sample_regular_graph,
)
from edgelab.ensemble import max_row_sum

n, d = 400, 3
g = sample_regular_graph(n, d, seed=7)
print(g.n_vertices, "vertices,", g.n_edges, "edges, degrees:", set(g.degrees().tolist()))

# %%
h0 = build_centered_adjacency(g)
print("max |row sum| of H0:", max_row_sum(h0))

# the flow runs up to t*, the time scale the comparison works at
t_star = critical_time(n, epsilon=0.1)
print(f"t* = {t_star:.4f}, e^(-t*/2) = {np.exp(-t_star / 2):.4f}")

# %%
ht = evolve_exact(h0, t_star, seed=1)
print("max |row sum| of H(t*):", max_row_sum(ht))

# compare the top of the spectrum before and after
top0 = np.sort(np.linalg.eigvalsh(h0))[-4:]
top1 = np.sort(np.linalg.eigvalsh(ht))[-4:]
print("top eigenvalues before:", np.round(top0, 4))
print("top eigenvalues after: ", np.round(top1, 4))
