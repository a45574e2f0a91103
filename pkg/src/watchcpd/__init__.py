"""Change point detection for high-dimensional time series.

The detector consumes a series in fixed-size mini-batches, keeps a buffer
describing the current distribution, and flags a change whenever the sliced
Wasserstein distance between a new batch and the buffer exceeds a
self-calibrated threshold. Evaluation (covering and margin-based F1),
dataset IO, synthetic generators, and a benchmark harness are included.
"""

from .bench import (
    RunResult,
    RunSpec,
    average_ranks,
    bench_directory,
    default_grid,
    evaluate_predictions,
    friedman_statistic,
    holm_adjust,
    load_grid,
    pairwise_rank_pvalues,
    run_best,
    run_default,
    summarize,
)
from .data import (
    SynthSpec,
    TimeSeriesDataset,
    annotations_path_for,
    load_annotations_json,
    load_dataset,
    load_dataset_csv,
    load_dataset_json,
    minmax_normalize,
    save_annotations_json,
    save_dataset_json,
    synth_cluster_sequence,
    synth_mean_shift,
)
from .detector import (
    ChangePoint,
    DetectorState,
    WatchConfig,
    compute_threshold,
    new_detector,
    process_series,
    step,
)
from .errors import (
    ConfigError,
    DegenerateBufferError,
    InvalidInputError,
    UnsupportedInstanceError,
    WatchError,
)
from .metrics import (
    AnnotationSet,
    covering,
    f1,
    greedy_match,
    jaccard,
    partition_from_changepoints,
    precision_recall,
)
from .wasserstein import (
    DistanceConfig,
    exact_1d_wasserstein,
    exact_ot_distance,
    sliced_wasserstein,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "ChangePoint",
    "ConfigError",
    "DegenerateBufferError",
    "DetectorState",
    "DistanceConfig",
    "InvalidInputError",
    "RunResult",
    "RunSpec",
    "SynthSpec",
    "TimeSeriesDataset",
    "UnsupportedInstanceError",
    "WatchConfig",
    "WatchError",
    "annotations_path_for",
    "average_ranks",
    "bench_directory",
    "compute_threshold",
    "covering",
    "default_grid",
    "evaluate_predictions",
    "exact_1d_wasserstein",
    "exact_ot_distance",
    "f1",
    "friedman_statistic",
    "greedy_match",
    "holm_adjust",
    "jaccard",
    "load_annotations_json",
    "load_dataset",
    "load_dataset_csv",
    "load_dataset_json",
    "load_grid",
    "minmax_normalize",
    "new_detector",
    "pairwise_rank_pvalues",
    "partition_from_changepoints",
    "precision_recall",
    "process_series",
    "run_best",
    "run_default",
    "save_annotations_json",
    "save_dataset_json",
    "sliced_wasserstein",
    "step",
    "summarize",
    "synth_cluster_sequence",
    "synth_mean_shift",
    "__version__",
]
