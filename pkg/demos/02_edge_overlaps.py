# %% [markdown]
# Edge eigenvector overlaps X_i = sqrt(N) <q, u_i> look Gaussian.
#
# We collect X_2 and X_3 over a few hundred graphs, then check the moments,
# the decorrelation and the KS distance to N(0, 1).

# %%
import numpy as np

from edgelab import (
    compute_overlaps,
    estimate_decorrelation,
    estimate_moments,
    ks_distance_to_normal,
    make_test_vector,
    sample_regular_graph,
    top_eigenpairs,
)
from edgelab.ensemble import centered_adjacency_operator

n, trials = 1000, 400
q = make_test_vector("coordinate-difference", n)
samples = []
for seed in range(trials):
    op = centered_adjacency_operator(sample_regular_graph(n, 3, seed))
    sd = top_eigenpairs(op, 2, seed=seed)
    samples.append(compute_overlaps(sd, q, [2, 3], seed=seed))

# %%
mo = estimate_moments(samples, index=2)
print(f"E X2^2 = {mo.second:.3f} +- {mo.se_second:.3f}   (Gaussian: 1)")
print(f"E X2^4 = {mo.fourth:.3f} +- {mo.se_fourth:.3f}   (Gaussian: 3)")

dc = estimate_decorrelation(samples, 2, 3)
print(f"E X2 X3 = {dc.product_moment:+.3f} +- {dc.std_error:.3f}")

x2 = np.array([s.value(2) for s in samples])
print(f"KS distance to N(0,1): {ks_distance_to_normal(x2):.3f}  (sampling floor ~ {0.87 / np.sqrt(trials):.3f})")
