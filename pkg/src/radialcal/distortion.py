"""Radial distortion models, their forward warps, and undistortion dispatch.

Three radial warp factors are supported, each acting on the normalized image
plane as ``(x_d, y_d) = f(r) * (x, y)`` with ``r = sqrt(x^2 + y^2)``:

* ``model1``: ``f(r) = 1 + k1 r^2 + k2 r^4`` (classic two-term even warp)
* ``model2``: ``f(r) = 1 + k1 r^2`` (single coefficient)
* ``model3``: ``f(r) = 1 + k1 r + k2 r^2`` (odd low-order warp with a
  closed-form inverse through a cubic)

Coefficients are not comparable across models; a spec binds them to its model
tag so they cannot be reused under a different basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cubic import CubicCoeffs, NoRealSolution, real_roots, undistort_xy
from .geometry import IntrinsicMatrix, NormalizedPoint, PixelPoint, to_normalized


class NotConverged(RuntimeError):
    """Iterative radius inversion failed to reach tolerance."""


class Model(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"


def n_coefficients(model: Model) -> int:
    return 1 if model is Model.MODEL2 else 2


@dataclass(frozen=True)
class DistortionSpec:
    """Model selector plus coefficients; ``k2`` is stored as 0 for model2."""

    model: Model
    k1: float
    k2: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        if not (math.isfinite(self.k1) and math.isfinite(self.k2)):
            raise ValueError("distortion coefficients must be finite")
        if self.model is Model.MODEL2:
            object.__setattr__(self, "k2", 0.0)

    @property
    def coefficients(self) -> tuple[float, ...]:
        if self.model is Model.MODEL2:
            return (self.k1,)
        return (self.k1, self.k2)

    @classmethod
    def from_coefficients(cls, model: Model, coeffs) -> "DistortionSpec":
        coeffs = tuple(float(c) for c in coeffs)
        if model is Model.MODEL2:
            (k1,) = coeffs
            return cls(model, k1)
        k1, k2 = coeffs
        return cls(model, k1, k2)


@dataclass(frozen=True)
class WorkingDomain:
    """Normalized-radius interval ``[0, r_max]`` on which a spec is trusted."""

    r_max: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_max) and self.r_max > 0.0):
            raise ValueError("r_max must be finite and positive")


def warp_factor(spec: DistortionSpec, r):
    """``f(r)`` for the spec's model; accepts scalars or arrays."""
    if spec.model is Model.MODEL1:
        r2 = r * r
        return 1.0 + spec.k1 * r2 + spec.k2 * r2 * r2
    if spec.model is Model.MODEL2:
        return 1.0 + spec.k1 * r * r
    return 1.0 + spec.k1 * r + spec.k2 * r * r


def warp_slope(spec: DistortionSpec, r):
    """``df/dr``; scalar or array alongside warp_factor."""
    if spec.model is Model.MODEL1:
        return 2.0 * spec.k1 * r + 4.0 * spec.k2 * r ** 3
    if spec.model is Model.MODEL2:
        return 2.0 * spec.k1 * r
    return spec.k1 + 2.0 * spec.k2 * r


def coefficient_basis(model: Model, r: np.ndarray) -> np.ndarray:
    """Columns ``df/dk_i`` evaluated at ``r``; shape ``(*r.shape, n_coeffs)``."""
    r = np.asarray(r, dtype=float)
    if model is Model.MODEL1:
        return np.stack([r ** 2, r ** 4], axis=-1)
    if model is Model.MODEL2:
        return np.stack([r ** 2], axis=-1)
    return np.stack([r, r ** 2], axis=-1)


def distort_normalized(spec: DistortionSpec, n: NormalizedPoint) -> NormalizedPoint:
    """Forward radial warp on the unit focal plane."""
    f = warp_factor(spec, n.radius)
    return NormalizedPoint(n.x * f, n.y * f)


def distort_pixel(spec: DistortionSpec, p: PixelPoint, A: IntrinsicMatrix) -> PixelPoint:
    """Forward warp expressed directly on pixels about the principal point.

    The radius is still measured on the normalized undistorted point, which
    makes this identical (to rounding) to warping in normalized coordinates
    and re-applying the intrinsics.
    """
    f = warp_factor(spec, to_normalized(p, A).radius)
    return PixelPoint(
        A.u0 + (p.u - A.u0) * f,
        A.v0 + (p.v - A.v0) * f,
    )


def _quadratic_real_roots(a: float, b: float, c: float) -> tuple[float, ...]:
    """Real roots of ``a x^2 + b x + c``, degree degradation included."""
    if a == 0.0:
        if b == 0.0:
            return ()
        return (-c / b,)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ()
    sq = math.sqrt(disc)
    u = -0.5 * (b + math.copysign(sq, b if b != 0.0 else 1.0))
    if u == 0.0:
        return (0.0, 0.0)
    return (u / a, c / u)


def validate_monotone(spec: DistortionSpec, dom: WorkingDomain) -> bool:
    """True iff ``F(r) = r f(r)`` is strictly increasing on ``[0, r_max]``.

    ``F'`` is a polynomial of degree at most four; since ``F'(0) = 1`` the
    condition reduces to ``F'`` having no real root inside the domain.
    """
    k1, k2 = spec.k1, spec.k2
    critical: list[float] = []
    if spec.model is Model.MODEL3:
        critical = [r for r in _quadratic_real_roots(3.0 * k2, 2.0 * k1, 1.0)]
    else:
        # F' = 1 + 3 k1 r^2 + 5 k2 r^4 (k2 = 0 covers model2): quadratic in r^2.
        for s in _quadratic_real_roots(5.0 * k2, 3.0 * k1, 1.0):
            if s >= 0.0:
                critical.append(math.sqrt(s))
    return not any(0.0 <= r <= dom.r_max for r in critical)


def invert_radius_newton(
    spec: DistortionSpec,
    r_d: float,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> float:
    """Damped Newton solve of ``r f(r) = r_d`` starting from ``r = r_d``.

    Works for any model whose warp is monotone around the solution; used as
    the model1 inverse and as an independent cross-check of the analytic
    paths. Raises NotConverged when the residual does not fall below ``tol``.
    """
    if r_d < 0.0:
        raise ValueError("distorted radius must be nonnegative")
    if r_d == 0.0:
        return 0.0
    r = r_d
    res = r * warp_factor(spec, r) - r_d
    for _ in range(max_iter):
        if abs(res) <= tol * max(1.0, r_d):
            return r
        slope = warp_factor(spec, r) + r * warp_slope(spec, r)
        if slope <= 0.0:
            raise NotConverged(
                f"radius equation has non-increasing slope at r={r!r}"
            )
        step = res / slope
        # Halve the step until the residual actually shrinks (monotone damping).
        for _ in range(40):
            r_new = r - step
            if r_new >= 0.0:
                res_new = r_new * warp_factor(spec, r_new) - r_d
                if abs(res_new) < abs(res):
                    break
            step *= 0.5
        else:
            raise NotConverged(f"damping failed near r={r!r} for r_d={r_d!r}")
        r, res = r_new, res_new
    if abs(res) <= tol * max(1.0, r_d):
        return r
    raise NotConverged(
        f"no convergence after {max_iter} iterations (residual {res!r})"
    )


def _undistort_model2(spec: DistortionSpec, d: NormalizedPoint) -> NormalizedPoint:
    """Depressed-cubic inverse for the single-coefficient even warp.

    With ``c = y_d / x_d`` the component equation is
    ``x_d = x + k1 (1 + c^2) x^3`` (no quadratic term), solved by the same
    cubic machinery; the admissible root is the one closest to ``x_d``. A
    relatively negligible x component swaps the axis roles so ``c`` stays
    bounded.
    """
    if abs(d.x) <= 1e-12 * max(1.0, abs(d.y)):
        if abs(d.y) <= 1e-12:
            return NormalizedPoint(0.0, 0.0)
        roots = real_roots(CubicCoeffs(y=d.y, p=0.0, q=spec.k1))
        y = min(roots, key=lambda t: abs(t - d.y))
        return NormalizedPoint(0.0, y)
    c = d.y / d.x
    roots = real_roots(CubicCoeffs(y=d.x, p=0.0, q=spec.k1 * (1.0 + c * c)))
    if len(roots) == 0:
        raise NoRealSolution(f"no real root for x_d={d.x!r} under {spec}")
    x = min(roots, key=lambda t: abs(t - d.x))
    return NormalizedPoint(x, c * x)


def undistort(spec: DistortionSpec, d: NormalizedPoint) -> NormalizedPoint:
    """Inverse of distort_normalized on the spec's monotone working domain.

    model3 and model2 use closed-form cubic roots; model1 has no closed form
    and falls back to the damped-Newton radius inversion.
    """
    if spec.model is Model.MODEL3:
        x, y = undistort_xy(d.x, d.y, spec.k1, spec.k2)
        return NormalizedPoint(x, y)
    if spec.model is Model.MODEL2:
        return _undistort_model2(spec, d)
    r_d = d.radius
    if r_d == 0.0:
        return NormalizedPoint(0.0, 0.0)
    r = invert_radius_newton(spec, r_d)
    s = r / r_d
    return NormalizedPoint(d.x * s, d.y * s)
