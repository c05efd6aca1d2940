"""Univariate convex clustering via an l1 fusion penalty.

The package computes the exact solution path of the fused clustering
criterion, post-processes it by keeping only merges between sizeable
clusters, analyzes the analogous population procedure on 1-d mixture
densities, and ships a seeded simulation harness plus a CLI.
"""

from .bmt import (
    BigMerge,
    BmtConfig,
    BmtResult,
    MultivariateBmtResult,
    assess_modality,
    assign_labels,
    run_bmt,
    run_bmt_multivariate,
)
from .experiments import (
    ExperimentSpec,
    ReplicationSummary,
    hausdorff_distance,
    oracle_partition_mse,
    replicate_seed,
    run_consistency_check,
    run_k_experiment,
    run_modality_experiment,
    run_scale_experiment,
)
from .mixtures import (
    Beta,
    ChiSquare,
    Component,
    Laplace,
    MixtureModel,
    Normal,
    StudentT,
    parse_mixture,
)
from .path import (
    ClusterPath,
    MergeEvent,
    SortedSample,
    build_merge_path,
    centroids_at,
    partition_at_k,
    split_sequence_oracle,
)
from .population import (
    MisclassificationReport,
    NoBalanceError,
    PopulationSplit,
    balanced_right_end,
    find_population_split,
    mean_gap,
    mean_gap_slope,
    midpoint_imbalance,
    misclassification_report,
    population_table_row,
    split_size,
)

__version__ = "0.1.0"

__all__ = [
    "BigMerge",
    "BmtConfig",
    "BmtResult",
    "Beta",
    "ChiSquare",
    "ClusterPath",
    "Component",
    "ExperimentSpec",
    "Laplace",
    "MergeEvent",
    "MisclassificationReport",
    "MixtureModel",
    "MultivariateBmtResult",
    "NoBalanceError",
    "Normal",
    "PopulationSplit",
    "ReplicationSummary",
    "SortedSample",
    "StudentT",
    "assess_modality",
    "assign_labels",
    "balanced_right_end",
    "build_merge_path",
    "centroids_at",
    "find_population_split",
    "hausdorff_distance",
    "mean_gap",
    "mean_gap_slope",
    "midpoint_imbalance",
    "misclassification_report",
    "oracle_partition_mse",
    "parse_mixture",
    "partition_at_k",
    "population_table_row",
    "replicate_seed",
    "run_bmt",
    "run_bmt_multivariate",
    "run_consistency_check",
    "run_k_experiment",
    "run_modality_experiment",
    "run_scale_experiment",
    "split_sequence_oracle",
    "split_size",
    "__version__",
]
