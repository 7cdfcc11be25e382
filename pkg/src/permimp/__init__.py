"""Regression random forests with out-of-bag permutation importance.

The package implements a subsampling-without-replacement forest with
variance-reduction splits and per-node feature subspacing, the
derangement-restricted OOB permutation importance, theoretical importance
oracles, and a seeded Monte-Carlo harness that reproduces the unbiasedness
experiments at configurable scale.
"""

__version__ = "0.1.0"

from .datagen import (
    BETA_0,
    LinkModel,
    Provenance,
    RegressionDataset,
    beta_default,
    generate_dataset,
    high_dim_model,
    link_eval,
    link_variance,
    load_dataset_csv,
    save_dataset_csv,
)
from .errors import PermimpError
from .forest import (
    ForestModel,
    ForestParams,
    fit_forest,
    load_model,
    oob_counts,
    oob_mse,
    oob_predictions,
    predict,
    predict_oob,
    residual_variance,
    save_model,
    sn_estimate,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    config_from_toml,
    reproduce,
    run_experiment,
)
from .importance import (
    ImportanceReport,
    importance_with_oracle,
    permutation_importance,
    report_to_csv,
)
from .oracle import OracleValue, oracle_additive, oracle_mc, oracle_value, oracle_vector
from .randomness import (
    ResampleRecord,
    SeedSpec,
    bootstrap_with_replacement,
    feature_subspace,
    oob_probability,
    random_derangement,
    subsample_without_replacement,
)
from .tree import TreeNode, TreeParams, best_split, grow_tree, predict_tree

__all__ = [
    "BETA_0",
    "ExperimentConfig",
    "ExperimentResult",
    "ForestModel",
    "ForestParams",
    "ImportanceReport",
    "LinkModel",
    "OracleValue",
    "PermimpError",
    "Provenance",
    "RegressionDataset",
    "ResampleRecord",
    "SeedSpec",
    "TreeNode",
    "TreeParams",
    "best_split",
    "beta_default",
    "bootstrap_with_replacement",
    "config_from_toml",
    "feature_subspace",
    "fit_forest",
    "generate_dataset",
    "grow_tree",
    "high_dim_model",
    "importance_with_oracle",
    "link_eval",
    "link_variance",
    "load_dataset_csv",
    "load_model",
    "oob_counts",
    "oob_mse",
    "oob_predictions",
    "oob_probability",
    "oracle_additive",
    "oracle_mc",
    "oracle_value",
    "oracle_vector",
    "permutation_importance",
    "predict",
    "predict_oob",
    "predict_tree",
    "random_derangement",
    "report_to_csv",
    "reproduce",
    "residual_variance",
    "run_experiment",
    "save_dataset_csv",
    "save_model",
    "sn_estimate",
    "subsample_without_replacement",
]
