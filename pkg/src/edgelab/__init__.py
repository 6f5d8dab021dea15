"""Monte Carlo toolkit for eigenvector overlaps of random regular graphs.

Samplers for uniform d-regular graphs and the constrained GOE, a constrained
Ornstein-Uhlenbeck matrix flow, spectral decompositions and resolvent
statistics, overlap estimators, distances to the normal law, explicit bound
constants, and a seeded experiment runner.
"""

__version__ = "0.1.0"

from .constants import berry_esseen_bound, constants_table, evaluate_constant
from .ensemble import (
    build_centered_adjacency,
    critical_time,
    evolve_exact,
    evolve_path,
    project_to_constraint,
    sample_constrained_goe,
)
from .experiment import ExperimentConfig, derive_trial_seed, parse_config, run_experiment
from .graphs import RegularGraph, audit_regularity, sample_regular_graph
from .metrics import estimate_cumulants, fit_rate, ks_distance_to_normal, multivariate_gaussian_distance
from .overlaps import (
    compute_overlaps,
    delocalization_stats,
    estimate_decorrelation,
    estimate_moments,
    joint_covariance,
    make_test_vector,
    simulate_overlap_sde,
)
from .spectral import (
    SpectralDecomposition,
    decompose,
    edge_spacing_profile,
    gap_sum_statistic,
    local_law_deviation_profile,
    m_sc,
    top_eigenpairs,
)
