"""Camera calibration with low-order radial distortion models, a closed-form
cubic undistortion path, and a single-view ground-line localizer."""

from .calibration import (
    CalibrationResult,
    CalibrationView,
    ComparisonReport,
    CorrespondenceSet,
    OptimizerOptions,
    calibrate,
    compare_models,
    estimate_homography,
    extrinsics_from_homography,
    init_distortion,
    intrinsics_from_homographies,
    objective,
    refine,
)
from .distortion import (
    DistortionSpec,
    Model,
    WorkingDomain,
    distort_normalized,
    distort_pixel,
    undistort,
    validate_monotone,
    warp_factor,
)
from .geometry import (
    AbsoluteConic,
    Homography,
    IntrinsicMatrix,
    NormalizedPoint,
    PixelPoint,
    ViewExtrinsics,
    WorldPoint,
    project,
    to_normalized,
    to_pixel,
)
from .localize import LineMap, LocalizationFix, intersect_ground, localize
from .synth import PoseRanges, SceneTruth, SynthSpec, generate_scene

__version__ = "0.1.0"

__all__ = [
    "AbsoluteConic",
    "CalibrationResult",
    "CalibrationView",
    "ComparisonReport",
    "CorrespondenceSet",
    "DistortionSpec",
    "Homography",
    "IntrinsicMatrix",
    "LineMap",
    "LocalizationFix",
    "Model",
    "NormalizedPoint",
    "OptimizerOptions",
    "PixelPoint",
    "PoseRanges",
    "SceneTruth",
    "SynthSpec",
    "ViewExtrinsics",
    "WorkingDomain",
    "WorldPoint",
    "calibrate",
    "compare_models",
    "distort_normalized",
    "distort_pixel",
    "estimate_homography",
    "extrinsics_from_homography",
    "generate_scene",
    "init_distortion",
    "intersect_ground",
    "intrinsics_from_homographies",
    "localize",
    "objective",
    "project",
    "refine",
    "to_normalized",
    "to_pixel",
    "undistort",
    "validate_monotone",
    "warp_factor",
]
