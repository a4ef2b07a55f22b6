"""Long-tailed classification toolkit.

Thin Python layer over the compiled ``_pih2t`` extension: long-tailed data
synthesis, the permutation-invariant fusion layer, ratio-based head-to-tail
feature mixing, two-stage training, evaluation, and analysis oracles.
"""

from _pih2t import (  # noqa: F401
    ConfigError,
    Dataset,
    Model,
    TrainOutput,
    cosine_distance,
    couple_branches,
    evaluate,
    exponential_profile,
    fit_pca2d,
    force_oracle_correct,
    force_oracle_wrong,
    fusion_ratios,
    h2tf_fuse,
    init_pif_params,
    load_checkpoint,
    load_dataset,
    margin_audit,
    pareto_profile,
    partition_classes,
    pi_mean,
    pif_fuse,
    pooled_representation,
    run_training,
    save_checkpoint,
    save_dataset,
    synth_gaussian_longtail,
    tail_to_head_count,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "Model",
    "TrainOutput",
    "cosine_distance",
    "couple_branches",
    "evaluate",
    "exponential_profile",
    "fit_pca2d",
    "force_oracle_correct",
    "force_oracle_wrong",
    "fusion_ratios",
    "h2tf_fuse",
    "init_pif_params",
    "load_checkpoint",
    "load_dataset",
    "margin_audit",
    "pareto_profile",
    "partition_classes",
    "pi_mean",
    "pif_fuse",
    "pooled_representation",
    "run_training",
    "save_checkpoint",
    "save_dataset",
    "synth_gaussian_longtail",
    "tail_to_head_count",
]

__version__ = "0.1.0"
