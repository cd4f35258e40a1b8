"""Optical-strain features for subtle facial motion analysis.

The package turns a video of a face into descriptors of its fine-grained
motion: dense optical flow between consecutive frames, per-pixel strain
magnitudes, a pooled composite-strain feature vector (OSF), block LBP-TOP
histograms weighted by block-mean strain (OSW), and a cross-validated
linear-SVM evaluation harness for the resulting features.
"""

from .evaluate import (
    EvalReport,
    FeatureVector,
    Prediction,
    concat_features,
    confusion_matrix,
    cross_validate,
    report_from_predictions,
    train_linear_svm,
)
from .flow import FlowField, estimate_flow, load_flow, save_flow
from .imaging import (
    FrameDecodeError,
    FrameSequence,
    FrameSizeMismatchError,
    SequenceError,
    SequenceTooShortError,
    gaussian_filter,
    gaussian_kernel,
    load_sequence,
    resize_bilinear,
    sobel_vertical,
)
from .lbptop import (
    LbpTopParams,
    block_histograms,
    flatten_histograms,
    lbp_code,
    zero_noise_blocks,
)
from .osf import (
    ClipThresholds,
    clip_by_region,
    composite_strain_map,
    osf_vector,
    suppress_vertical_edges,
)
from .osw import osw_vector, spatial_pool, temporal_pool, weight_xy_histograms
from .pipeline import (
    ManifestEntry,
    PipelineConfig,
    extract_features,
    load_manifest,
    read_features_csv,
    resample_temporal,
    run_pipeline,
    save_manifest,
    write_features_csv,
)
from .strain import StrainMap, compute_strain, strain_sequence
from .synthetic import generate_synthetic

__version__ = "0.1.0"
