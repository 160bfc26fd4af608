import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radialcal.distortion import DistortionSpec, Model
from radialcal.geometry import IntrinsicMatrix
from radialcal.synth import SynthSpec, generate_scene


@pytest.fixture
def default_intrinsics() -> IntrinsicMatrix:
    return IntrinsicMatrix(alpha=800.0, beta=800.0, gamma=0.2, u0=320.0, v0=240.0)


def make_scene(
    seed: int,
    model: Model = Model.MODEL3,
    k1: float = -0.12,
    k2: float = -0.14,
    noise_sigma: float = 0.0,
    intrinsics: IntrinsicMatrix | None = None,
    **kwargs,
):
    """Convenience wrapper: synthetic correspondences plus their ground truth."""
    spec = SynthSpec(
        seed=seed,
        intrinsics=intrinsics or IntrinsicMatrix(800.0, 800.0, 0.2, 320.0, 240.0),
        distortion=DistortionSpec(model, k1, k2),
        noise_sigma=noise_sigma,
        **kwargs,
    )
    return generate_scene(spec)
