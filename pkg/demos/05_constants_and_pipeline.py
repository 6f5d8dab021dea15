# %% [markdown]
# Bound constants and a small end-to-end experiment.

# %%
import tempfile

from edgelab import berry_esseen_bound
from edgelab.constants import constants_table, format_table
from edgelab.experiment import ExperimentConfig, run_experiment

b = berry_esseen_bound(1e6, 3, 0.01)
print(f"N^(-1/6+eps) at N=1e6, eps=0.01: {b.n_factor:.4f}")
print(format_table(constants_table(3, 0.01, 1e6)))

# %%
# The same pipeline the CLI `run` subcommand drives, at toy scale.
out = tempfile.mkdtemp()
cfg = ExperimentConfig(
    sizes=[200, 300, 400],
    trials=150,
    base_seed=5,
    statistics=["moments", "ks", "decorrelation"],
    output_dir=out,
)
rec = run_experiment(cfg)
for s in rec.summaries:
    print(f"{s['statistic_name']:<22} N={s['N']:<5} {s['value']:.4f}")
for f in rec.rate_fits:
    print(f"rate fit {f['statistic_name']}: exponent {f['exponent']:+.2f}")
print("files in", out, ":", len(rec.files))
