"""Seeded synthetic calibration scenes: planar grids seen by posed cameras.

Stands in for real extracted feature data in tests and experiments. A scene
is fully determined by its spec (including the RNG seed), so generated
correspondences are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibrationView, CorrespondenceSet
from .distortion import DistortionSpec, warp_factor
from .geometry import IntrinsicMatrix, ViewExtrinsics, rotation_from_axis_angle


@dataclass(frozen=True)
class PoseRanges:
    """Sampling ranges for the per-view camera placement.

    ``distance`` is the depth of the plane center along the optical axis,
    ``tilt_deg`` the magnitude range of the two tilt angles (random signs),
    and ``offset`` the lateral displacement range.
    """

    distance: tuple[float, float] = (1.1, 1.5)
    tilt_deg: tuple[float, float] = (10.0, 30.0)
    offset: tuple[float, float] = (-0.1, 0.1)


@dataclass(frozen=True)
class SynthSpec:
    """Everything needed to synthesize one correspondence set."""

    seed: int
    intrinsics: IntrinsicMatrix
    distortion: DistortionSpec
    grid_nx: int = 8
    grid_ny: int = 8
    spacing: float = 0.15
    n_views: int = 3
    noise_sigma: float = 0.0
    pose: PoseRanges = field(default_factory=PoseRanges)

    def __post_init__(self) -> None:
        if self.grid_nx < 2 or self.grid_ny < 2:
            raise ValueError("grid must be at least 2x2")
        if self.spacing <= 0.0 or not math.isfinite(self.spacing):
            raise ValueError("spacing must be positive")
        if self.n_views < 1:
            raise ValueError("need at least one view")
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be nonnegative")


@dataclass(frozen=True)
class SceneTruth:
    """Generating parameters of a synthetic scene (the sidecar ground truth)."""

    intrinsics: IntrinsicMatrix
    distortion: DistortionSpec
    extrinsics: tuple[ViewExtrinsics, ...]
    noise_sigma: float
    seed: int


def _grid_points(spec: SynthSpec) -> np.ndarray:
    xs = (np.arange(spec.grid_nx) - (spec.grid_nx - 1) / 2.0) * spec.spacing
    ys = (np.arange(spec.grid_ny) - (spec.grid_ny - 1) / 2.0) * spec.spacing
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _sample_pose(spec: SynthSpec, rng: np.random.Generator) -> ViewExtrinsics:
    lo, hi = spec.pose.tilt_deg
    tilt_x = math.radians(rng.uniform(lo, hi)) * rng.choice([-1.0, 1.0])
    tilt_y = math.radians(rng.uniform(lo, hi)) * rng.choice([-1.0, 1.0])
    roll = rng.uniform(-math.pi / 8.0, math.pi / 8.0)
    tx = rng.uniform(*spec.pose.offset)
    ty = rng.uniform(*spec.pose.offset)
    tz = rng.uniform(*spec.pose.distance)
    # Compose in the projection form P_c = R P_w + t, then store canonically.
    R = (
        rotation_from_axis_angle(np.array([tilt_x, 0.0, 0.0]))
        @ rotation_from_axis_angle(np.array([0.0, tilt_y, 0.0]))
        @ rotation_from_axis_angle(np.array([0.0, 0.0, roll]))
    )
    return ViewExtrinsics.from_world_to_camera(R, np.array([tx, ty, tz]))


def generate_scene(spec: SynthSpec) -> tuple[CorrespondenceSet, SceneTruth]:
    """Project the target grid per view, warp, and optionally add pixel noise.

    Returns the observed correspondences together with the generating truth.
    Raises ValueError if a sampled pose places target points at non-positive
    depth (choose distance ranges larger than the plane's tilted extent).
    """
    rng = np.random.default_rng(spec.seed)
    world = _grid_points(spec)
    world3 = np.column_stack([world, np.zeros(len(world))])
    A = spec.intrinsics

    views = []
    extrinsics = []
    for view_id in range(spec.n_views):
        E = _sample_pose(spec, rng)
        R, t = E.world_to_camera()
        pc = world3 @ R.T + t
        if np.any(pc[:, 2] <= 0.0):
            raise ValueError(
                f"sampled pose for view {view_id} puts target points behind "
                "the camera; widen the distance range"
            )
        x = pc[:, 0] / pc[:, 2]
        y = pc[:, 1] / pc[:, 2]
        f = warp_factor(spec.distortion, np.hypot(x, y))
        xd, yd = x * f, y * f
        pixels = np.column_stack(
            [A.alpha * xd + A.gamma * yd + A.u0, A.beta * yd + A.v0]
        )
        if spec.noise_sigma > 0.0:
            pixels = pixels + rng.normal(0.0, spec.noise_sigma, pixels.shape)
        views.append(CalibrationView(view_id=view_id, world_xy=world, pixels=pixels))
        extrinsics.append(E)

    truth = SceneTruth(
        intrinsics=A,
        distortion=spec.distortion,
        extrinsics=tuple(extrinsics),
        noise_sigma=spec.noise_sigma,
        seed=spec.seed,
    )
    return CorrespondenceSet(tuple(views)), truth
