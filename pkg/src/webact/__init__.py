"""webact: curation, fusion, localization and evaluation for webly-collected
action datasets.

The toolkit consumes externally produced feature vectors and per-frame class
probabilities. It filters noisy sample sets with graph random walks, mixes
multi-source training sets under quotas, fuses two-stream scores, localizes
actions in untrimmed videos and evaluates all of it (accuracy, filtering
precision/recall, temporal IoU, detection and classification mAP).
"""

from .assembly import (MixQuota, NoiseBench, QuotaBucket, inject_noise,
                       mix_sources, split_train_val)
from .bench import (BiasClassRow, NoiseSweepLevel, generate_clusters,
                    run_filter_bias_demo, run_noise_sweep)
from .errors import (ConvergenceError, DegenerateGraphError, ParseError,
                     ShortageError, ValidationError)
from .filtering import ConfidenceFilter, RandomWalkFilter
from .flow import FlowVolume, assemble_flow_stack, inflate_channel_weights
from .fusion import (Prediction, ProbabilityVector, fuse_average, fuse_product,
                     fuse_three, predict_label, temporal_average)
from .graph import pairwise_distances, transition_matrix
from .localization import (LocalizationConfig, localize_frame_by_frame,
                           localize_sliding_window, merge_segments)
from .metrics import (PRPoint, accuracy, classification_ap, classification_map,
                      detection_ap, detection_map, filtering_pr,
                      per_class_detection_ap, pr_curve, temporal_iou)
from .records import (ProbabilitySeries, SampleRecord, SampleSet, Segment,
                      Source)
from .walk import (FilterResult, RelevanceResult, filter_sample_set,
                   filter_threshold, filter_top_k, relevance_scores,
                   supervised_filter)

__version__ = "0.1.0"

__all__ = [
    "ConfidenceFilter",
    "ConvergenceError",
    "DegenerateGraphError",
    "FilterResult",
    "FlowVolume",
    "LocalizationConfig",
    "MixQuota",
    "NoiseBench",
    "NoiseSweepLevel",
    "BiasClassRow",
    "PRPoint",
    "ParseError",
    "Prediction",
    "ProbabilitySeries",
    "ProbabilityVector",
    "QuotaBucket",
    "RandomWalkFilter",
    "RelevanceResult",
    "SampleRecord",
    "SampleSet",
    "Segment",
    "ShortageError",
    "Source",
    "ValidationError",
    "accuracy",
    "assemble_flow_stack",
    "classification_ap",
    "classification_map",
    "detection_ap",
    "detection_map",
    "filter_sample_set",
    "filter_threshold",
    "filter_top_k",
    "filtering_pr",
    "fuse_average",
    "fuse_product",
    "fuse_three",
    "generate_clusters",
    "inflate_channel_weights",
    "inject_noise",
    "localize_frame_by_frame",
    "localize_sliding_window",
    "merge_segments",
    "mix_sources",
    "pairwise_distances",
    "per_class_detection_ap",
    "pr_curve",
    "predict_label",
    "relevance_scores",
    "run_filter_bias_demo",
    "run_noise_sweep",
    "split_train_val",
    "supervised_filter",
    "temporal_average",
    "temporal_iou",
    "transition_matrix",
]
