# %% [markdown]
# The spectral edge: spacing, gap sums and the isotropic local law.

# %%
import numpy as np

from edgelab import build_centered_adjacency, decompose, make_test_vector, sample_regular_graph
from edgelab.spectral import (
    edge_grid,
    edge_spacing_profile,
    gap_sum_statistic,
    local_law_deviation_profile,
    m_kesten_mckay,
)

n = 1000
h = build_centered_adjacency(sample_regular_graph(n, 3, seed=11))
sd = decompose(h)

# eigenvalues near 2 thin out like (k/N)^(2/3)
prof = edge_spacing_profile(sd, 40)
slope = np.polyfit(np.log(prof[3:, 0] / n), np.log(prof[3:, 1]), 1)[0]
print(f"edge spacing slope over k in [4, 40]: {slope:.2f}")

print(f"gap sum at i=2: {gap_sum_statistic(sd, 2).value:.4g}")

# %%
# <q, G(z) q> against the semicircle and against the tree (Kesten-McKay) value.
q = make_test_vector("coordinate-difference", n).coords
energies, etas = edge_grid(n, 0.1)
sc = local_law_deviation_profile(sd, q, energies, etas, 0.1)
km = local_law_deviation_profile(sd, q, energies, etas, 0.1, reference=lambda z: m_kesten_mckay(z, 3))
print(f"sup deviation vs semicircle:    {sc.supremum:.3f}")
print(f"sup deviation vs Kesten-McKay:  {km.supremum:.3f}")
