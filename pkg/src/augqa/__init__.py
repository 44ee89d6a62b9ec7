"""QA toolkit for synthetic MRI augmentation pipelines.

Stages: slice harmonization, train/test leakage audit, generation-side
candidate gating, feature-space filtering with nested ratio sets,
generator-quality metrics with checkpoint selection, and the paired
multi-seed statistical evaluation of augmentation utility.
"""

from .errors import DataError
from .manifest import ImageRecord, Manifest, build_manifest, load_manifest, \
    stratum_counts, write_manifest
from .features import FeatureMatrix, load_feature_matrix, write_feature_matrix
from .cubes import PredictionCube, TrainingHistory, load_prediction_cube, \
    load_prediction_cubes, load_training_history, make_cube, write_prediction_cube
from .preprocess import MaskResult, PreprocessResult, extract_brain_mask, \
    normalize_intensity, otsu_threshold, preprocess_image
from .phash import hamming, phash
from .audit import AuditReport, audit, remove_duplicates
from .gate import GateDecision, gate_candidate, quota
from .featfilter import FilterReport, StratumFilterModel, build_filtered_sets, \
    farthest_point_select, filter_candidates, fit_filter, ledoit_wolf, mahalanobis_sq
from .genmetrics import SnapshotMetrics, fid, fid_tier, kid, precision_recall, \
    select_checkpoint
from .stats import MetricVector, batch_quota, binomial_test, bootstrap_ci, \
    compare_conditions, confusion, efficiency_summary, gated_vlm_stats, holm, \
    metrics, paired_permutation, seed_stability, sign_flip_test, wilson_ci
from .config import RunConfig, load_config

__version__ = "0.1.0"
