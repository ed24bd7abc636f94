"""Selective identity fusion for deepfake detection.

Thin wrapper around the C++ core: synthetic embedding benchmark, gated
identity/visual fusion models, manual-backprop training, and ROC-AUC
evaluation.
"""

from selfi._selfi import (  # noqa: F401
    AblationResult,
    BenchmarkConfig,
    BenchmarkSpec,
    Checkpoint,
    ConfigError,
    DataError,
    Dims,
    EmbeddingDataset,
    EpochStats,
    EvalResult,
    ForwardTrace,
    GradCheckReport,
    GridResult,
    MethodSpec,
    MixedRun,
    ModelConfig,
    RhoStats,
    RunConfig,
    Sample,
    SelfiParams,
    TrainConfig,
    accuracy,
    aux_source_swap,
    cross_entropy,
    default_benchmark,
    default_run_config,
    forward,
    fuse,
    grad_check,
    init_params,
    read_checkpoint,
    read_dataset,
    relu,
    roc_auc,
    run_ablation,
    run_grid,
    run_mixed,
    sample_dataset,
    score_dataset,
    sigmoid,
    train,
    unseen_view,
    video_auc,
    write_checkpoint,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
