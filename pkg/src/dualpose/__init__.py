"""Face-swap forensics via dual head-pose inconsistency.

Estimate a face's 3D pose twice (whole-face landmarks vs central region
only), encode the discrepancy as a feature vector, and classify it with an
RBF SVM. Splicing a synthesized central face perturbs its landmarks, so the
two estimates disagree more for fakes than for untouched faces.
"""

from ._accel import BACKEND as accel_backend
from .evaluation import ScoredItem, aggregate_by_video, auroc, cosine_histogram, roc_curve
from .exceptions import (BehindCameraError, DataError, DualposeError,
                         InsufficientCorrespondencesError, InvalidRotationError,
                         PoseEstimationError, SchemaError)
from .face_model import (CanonicalFaceModel, LandmarkIndexSet, central_indices,
                         default_model, load_model, select, serialize,
                         whole_face_indices)
from .features import (DualPose, FaceObservation, FeatureVariant, FeatureVector,
                       StandardizationStats, apply_standardization, default_intrinsics,
                       estimate_dual_pose, fit_standardization, make_feature)
from .geometry import (CameraIntrinsics, Pose, cosine_distance, head_orientation,
                       matrix_to_rodrigues, project, rodrigues_to_matrix)
from .pnp import PnpSolution, solve_pnp
from .svm import (LabeledSample, SvmModel, SvmParams, decision_score, decision_scores,
                  grid_search_cv, rbf_kernel, train)
from .synth import SynthConfig, generate, paper_scale_experiment

__version__ = "0.1.0"

__all__ = [
    "accel_backend",
    "aggregate_by_video", "auroc", "cosine_histogram", "roc_curve", "ScoredItem",
    "BehindCameraError", "DataError", "DualposeError",
    "InsufficientCorrespondencesError", "InvalidRotationError",
    "PoseEstimationError", "SchemaError",
    "CanonicalFaceModel", "LandmarkIndexSet", "central_indices", "default_model",
    "load_model", "select", "serialize", "whole_face_indices",
    "DualPose", "FaceObservation", "FeatureVariant", "FeatureVector",
    "StandardizationStats", "apply_standardization", "default_intrinsics",
    "estimate_dual_pose", "fit_standardization", "make_feature",
    "CameraIntrinsics", "Pose", "cosine_distance", "head_orientation",
    "matrix_to_rodrigues", "project", "rodrigues_to_matrix",
    "PnpSolution", "solve_pnp",
    "LabeledSample", "SvmModel", "SvmParams", "decision_score", "decision_scores",
    "grid_search_cv", "rbf_kernel", "train",
    "SynthConfig", "generate", "paper_scale_experiment",
]
