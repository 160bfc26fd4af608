"""Planar-target calibration pipeline and the three-model comparison harness.

Stages follow the classic plane-based recipe: per-view homography by
normalized DLT, intrinsics from the absolute conic constraints, per-view
extrinsics from the decomposed homography, a linear least-squares guess for
the distortion coefficients, and finally joint Levenberg-Marquardt refinement
of the squared reprojection error

    J = sum_i sum_j || m_ij - mhat(A, k, R_i, t_i, M_j) ||^2

where the prediction mhat projects the planar point and applies the forward
radial warp in pixel space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distortion import (
    DistortionSpec,
    Model,
    coefficient_basis,
    n_coefficients,
    warp_factor,
    warp_slope,
)
from .geometry import (
    AbsoluteConic,
    DepthNotPositive,
    Homography,
    IntrinsicMatrix,
    ViewExtrinsics,
)


class DegenerateConfiguration(ValueError):
    """Point configuration cannot support the requested estimate."""


class SingularConfiguration(ValueError):
    """Stacked constraints are rank-deficient or the conic is not definite."""


class BehindCamera(ValueError):
    """No sign choice places the target plane in front of the camera."""


@dataclass(frozen=True)
class CalibrationView:
    """One image of the planar target: world (x, y) on z = 0 plus observed pixels."""

    view_id: int
    world_xy: np.ndarray
    pixels: np.ndarray

    def __post_init__(self) -> None:
        world = np.atleast_2d(np.asarray(self.world_xy, dtype=float))
        pix = np.atleast_2d(np.asarray(self.pixels, dtype=float))
        if world.ndim != 2 or world.shape[1] != 2:
            raise ValueError("world_xy must have shape (n, 2)")
        if pix.shape != world.shape:
            raise ValueError("pixels must match world_xy in shape")
        if not (np.all(np.isfinite(world)) and np.all(np.isfinite(pix))):
            raise ValueError("correspondences must be finite")
        world.setflags(write=False)
        pix.setflags(write=False)
        object.__setattr__(self, "world_xy", world)
        object.__setattr__(self, "pixels", pix)

    @property
    def n_points(self) -> int:
        return self.world_xy.shape[0]


@dataclass(frozen=True)
class CorrespondenceSet:
    """All views of one calibration session."""

    views: tuple[CalibrationView, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "views", tuple(self.views))
        ids = [v.view_id for v in self.views]
        if len(set(ids)) != len(ids):
            raise ValueError("view ids must be unique")

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_points(self) -> int:
        return sum(v.n_points for v in self.views)


@dataclass(frozen=True)
class OptimizerOptions:
    """Stopping contract for the nonlinear refinement."""

    tol_x: float = 1e-5
    tol_fun: float = 1e-5
    max_iter: int = 120
    max_fun_evals: int = 8000

    def __post_init__(self) -> None:
        if self.tol_x <= 0 or self.tol_fun <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter <= 0 or self.max_fun_evals <= 0:
            raise ValueError("iteration caps must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    """Estimated parameters plus the exact objective they achieve."""

    intrinsics: IntrinsicMatrix
    distortion: DistortionSpec
    view_ids: tuple[int, ...]
    extrinsics: tuple[ViewExtrinsics, ...]
    j_final: float
    rms_px: float
    per_point_residuals: tuple[np.ndarray, ...]
    converged: bool = True
    n_iterations: int = 0
    j_init: float | None = None
    stop_reason: str = ""


@dataclass(frozen=True)
class ModelReport:
    """One column of the comparison table."""

    model: Model
    result: CalibrationResult | None
    init_coefficients: tuple[float, ...] | None
    error: str | None = None


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side refinement of all three models from one linear start."""

    entries: tuple[ModelReport, ...]

    def entry(self, model: Model) -> ModelReport:
        for e in self.entries:
            if e.model is model:
                return e
        raise KeyError(model)


# ---------------------------------------------------------------------------
# Linear estimation


def _conditioning_transform(pts: np.ndarray) -> np.ndarray:
    """Isotropic normalization: centroid to origin, mean radius sqrt(2)."""
    centroid = pts.mean(axis=0)
    mean_dist = float(np.linalg.norm(pts - centroid, axis=1).mean())
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("points are (nearly) coincident")
    s = math.sqrt(2.0) / mean_dist
    return np.array(
        [
            [s, 0.0, -s * centroid[0]],
            [0.0, s, -s * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def estimate_homography(view: CalibrationView) -> Homography:
    """Least-squares plane-to-image homography by normalized DLT.

    Raises DegenerateConfiguration for fewer than four points or a
    rank-deficient design matrix (collinear/coincident configurations).
    """
    n = view.n_points
    if n < 4:
        raise DegenerateConfiguration(
            f"homography estimation needs at least 4 points, got {n}"
        )
    Tw = _conditioning_transform(view.world_xy)
    Tp = _conditioning_transform(view.pixels)
    w = view.world_xy * Tw[0, 0] + Tw[:2, 2]
    p = view.pixels * Tp[0, 0] + Tp[:2, 2]

    design = np.zeros((2 * n, 9))
    design[0::2, 0:2] = w
    design[0::2, 2] = 1.0
    design[0::2, 6:8] = -p[:, :1] * w
    design[0::2, 8] = -p[:, 0]
    design[1::2, 3:5] = w
    design[1::2, 5] = 1.0
    design[1::2, 6:8] = -p[:, 1:2] * w
    design[1::2, 8] = -p[:, 1]

    _, sv, vt = np.linalg.svd(design)
    if sv[7] < 1e-10 * sv[0]:
        raise DegenerateConfiguration(
            "design matrix is rank-deficient (collinear points?)"
        )
    Hn = vt[-1].reshape(3, 3)
    return Homography(np.linalg.inv(Tp) @ Hn @ Tw)


def _conic_rows(H: np.ndarray) -> np.ndarray:
    """The two orthonormality constraints one homography puts on the conic."""

    def v(i: int, j: int) -> np.ndarray:
        hi, hj = H[:, i], H[:, j]
        return np.array(
            [
                hi[0] * hj[0],
                hi[0] * hj[1] + hi[1] * hj[0],
                hi[1] * hj[1],
                hi[2] * hj[0] + hi[0] * hj[2],
                hi[2] * hj[1] + hi[1] * hj[2],
                hi[2] * hj[2],
            ]
        )

    return np.vstack([v(0, 1), v(0, 0) - v(1, 1)])


def intrinsics_from_conic(conic: AbsoluteConic) -> IntrinsicMatrix:
    """Closed-form extraction of the five intrinsics from ``B ~ A^-T A^-1``."""
    B = conic.matrix
    if B[0, 0] < 0.0:
        B = -B
    b11, b12, b22 = B[0, 0], B[0, 1], B[1, 1]
    b13, b23, b33 = B[0, 2], B[1, 2], B[2, 2]
    den = b11 * b22 - b12 * b12
    if b11 <= 0.0 or den <= 0.0:
        raise SingularConfiguration("conic is not positive definite up to sign")
    v0 = (b12 * b13 - b11 * b23) / den
    lam = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11
    if lam <= 0.0:
        raise SingularConfiguration("conic is not positive definite up to sign")
    alpha = math.sqrt(lam / b11)
    beta = math.sqrt(lam * b11 / den)
    gamma = -b12 * alpha * alpha * beta / lam
    u0 = gamma * v0 / beta - b13 * alpha * alpha / lam
    return IntrinsicMatrix(alpha, beta, gamma, u0, v0)


def intrinsics_from_homographies(
    homographies: Sequence[Homography],
) -> IntrinsicMatrix:
    """Estimate the intrinsics from at least three non-parallel plane views.

    Stacks both conic constraints per homography and solves the homogeneous
    least-squares problem for the six distinct entries of B. Raises
    SingularConfiguration when the constraints do not determine B (for
    example mutually parallel target planes) or B is not definite.
    """
    if len(homographies) < 3:
        raise SingularConfiguration(
            f"intrinsics need at least 3 views, got {len(homographies)}"
        )
    V = np.vstack([_conic_rows(H.matrix) for H in homographies])
    _, sv, vt = np.linalg.svd(V)
    if sv[4] < 1e-10 * sv[0]:
        raise SingularConfiguration(
            "conic constraints are rank-deficient (parallel planes provide "
            "the same information)"
        )
    b = vt[-1]
    B = np.array(
        [
            [b[0], b[1], b[3]],
            [b[1], b[2], b[4]],
            [b[3], b[4], b[5]],
        ]
    )
    return intrinsics_from_conic(AbsoluteConic(B))


def extrinsics_from_homography(H: Homography, A: IntrinsicMatrix) -> ViewExtrinsics:
    """Recover a view's pose from its homography and known intrinsics.

    The first two rotation columns come from the scaled ``A^-1 H``; the
    closest proper rotation (orthogonal Procrustes) replaces the raw columns,
    and the overall sign is fixed so the target plane sits at positive depth.
    """
    G = A.inverse_matrix @ H.matrix
    scale = float(np.linalg.norm(G[:, 0]))
    if scale < 1e-12:
        raise SingularConfiguration("homography column collapses under A^-1")
    G = G / scale
    if G[2, 2] < 0.0:
        G = -G
    t = G[:, 2]
    if abs(t[2]) < 1e-12:
        raise BehindCamera("target plane passes through the camera center")
    Q = np.column_stack([G[:, 0], G[:, 1], np.cross(G[:, 0], G[:, 1])])
    u, _, vt = np.linalg.svd(Q)
    R = u @ np.diag([1.0, 1.0, float(np.linalg.det(u @ vt))]) @ vt
    return ViewExtrinsics.from_world_to_camera(R, t)


# ---------------------------------------------------------------------------
# Objective and derivatives


def _world3(view: CalibrationView) -> np.ndarray:
    return np.column_stack([view.world_xy, np.zeros(view.n_points)])


def _camera_points(view: CalibrationView, E: ViewExtrinsics) -> np.ndarray:
    R, t = E.world_to_camera()
    pc = _world3(view) @ R.T + t
    if np.any(pc[:, 2] <= 0.0):
        raise DepthNotPositive(
            f"view {view.view_id} has points at non-positive depth"
        )
    return pc


def _predict_pixels(
    view: CalibrationView,
    A: IntrinsicMatrix,
    spec: DistortionSpec,
    E: ViewExtrinsics,
) -> np.ndarray:
    pc = _camera_points(view, E)
    x = pc[:, 0] / pc[:, 2]
    y = pc[:, 1] / pc[:, 2]
    f = warp_factor(spec, np.hypot(x, y))
    xd, yd = x * f, y * f
    return np.column_stack(
        [A.alpha * xd + A.gamma * yd + A.u0, A.beta * yd + A.v0]
    )


def objective(
    corr: CorrespondenceSet,
    A: IntrinsicMatrix,
    spec: DistortionSpec,
    extrinsics: Sequence[ViewExtrinsics],
) -> float:
    """Sum of squared pixel distances between observations and predictions."""
    if len(extrinsics) != corr.n_views:
        raise ValueError("one extrinsics entry per view is required")
    total = 0.0
    for view, E in zip(corr.views, extrinsics):
        diff = _predict_pixels(view, A, spec, E) - view.pixels
        total += float(np.sum(diff * diff))
    return total


def init_distortion(
    corr: CorrespondenceSet,
    A: IntrinsicMatrix,
    extrinsics: Sequence[ViewExtrinsics],
    model: Model,
) -> DistortionSpec:
    """Linear least-squares distortion coefficients from pixel displacements.

    Each observation contributes two equations linear in the coefficients,
    relating the observed minus predicted pixel offsets about the principal
    point to the model's radial basis. Falls back to zero coefficients when
    the normal equations are rank-deficient (e.g. all radii equal).
    """
    rows = []
    rhs = []
    for view, E in zip(corr.views, extrinsics):
        pc = _camera_points(view, E)
        x = pc[:, 0] / pc[:, 2]
        y = pc[:, 1] / pc[:, 2]
        basis = coefficient_basis(model, np.hypot(x, y))
        u = A.alpha * x + A.gamma * y + A.u0
        v = A.beta * y + A.v0
        rows.append((u - A.u0)[:, None] * basis)
        rows.append((v - A.v0)[:, None] * basis)
        rhs.append(view.pixels[:, 0] - u)
        rhs.append(view.pixels[:, 1] - v)
    design = np.vstack(rows)
    target = np.concatenate(rhs)
    coeffs, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < n_coefficients(model):
        coeffs = np.zeros(n_coefficients(model))
    return DistortionSpec.from_coefficients(model, coeffs)


def _pack_params(
    A: IntrinsicMatrix,
    spec: DistortionSpec,
    extrinsics: Sequence[ViewExtrinsics],
) -> np.ndarray:
    parts = [
        np.array([A.alpha, A.beta, A.gamma, A.u0, A.v0]),
        np.asarray(spec.coefficients),
    ]
    for E in extrinsics:
        parts.append(E.axis_angle)
        parts.append(E.t)
    return np.concatenate(parts)


def _unpack_params(
    theta: np.ndarray, model: Model, n_views: int
) -> tuple[IntrinsicMatrix, DistortionSpec, tuple[ViewExtrinsics, ...]]:
    nk = n_coefficients(model)
    A = IntrinsicMatrix(*theta[:5])
    spec = DistortionSpec.from_coefficients(model, theta[5 : 5 + nk])
    extrinsics = []
    for i in range(n_views):
        base = 5 + nk + 6 * i
        extrinsics.append(ViewExtrinsics(theta[base : base + 3], theta[base + 3 : base + 6]))
    return A, spec, tuple(extrinsics)


def _rotation_transpose_apply_jacobian(
    w: np.ndarray, d: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Values and w-derivatives of ``v = R(w)^T d`` for rows of d.

    Uses ``R^T d = d - a (w x d) + b (w (w.d) - theta^2 d)`` with
    ``a = sin(theta)/theta`` and ``b = (1 - cos(theta))/theta^2``; the
    coefficient derivatives switch to series below theta = 1e-4 so the
    expression stays smooth through w = 0.
    """
    theta2 = float(w @ w)
    theta = math.sqrt(theta2)
    if theta < 1e-4:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
        ca = -1.0 / 3.0 + theta2 / 30.0
        cb = -1.0 / 12.0 + theta2 / 180.0
    else:
        s, c = math.sin(theta), math.cos(theta)
        a = s / theta
        b = (1.0 - c) / theta2
        ca = (theta * c - s) / (theta2 * theta)
        cb = (theta * s - 2.0 * (1.0 - c)) / (theta2 * theta2)

    wxd = np.cross(w[None, :], d)
    wdotd = d @ w
    v = d - a * wxd + b * (wdotd[:, None] * w[None, :] - theta2 * d)

    n = d.shape[0]
    skew_d = np.zeros((n, 3, 3))
    skew_d[:, 0, 1] = -d[:, 2]
    skew_d[:, 0, 2] = d[:, 1]
    skew_d[:, 1, 0] = d[:, 2]
    skew_d[:, 1, 2] = -d[:, 0]
    skew_d[:, 2, 0] = -d[:, 1]
    skew_d[:, 2, 1] = d[:, 0]

    radial = wdotd[:, None] * w[None, :] - theta2 * d
    dv_dw = (
        -ca * wxd[:, :, None] * w[None, None, :]
        + a * skew_d
        + cb * radial[:, :, None] * w[None, None, :]
        + b
        * (
            wdotd[:, None, None] * np.eye(3)[None, :, :]
            + w[None, :, None] * d[:, None, :]
            - 2.0 * d[:, :, None] * w[None, None, :]
        )
    )
    return v, dv_dw


def _residuals_and_jacobian(
    theta: np.ndarray, corr: CorrespondenceSet, model: Model
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked pixel residuals and their dense Jacobian in packing order."""
    nk = n_coefficients(model)
    A, spec, extrinsics = _unpack_params(theta, model, corr.n_views)
    n_params = 5 + nk + 6 * corr.n_views
    m = 2 * corr.n_points
    res = np.zeros(m)
    jac = np.zeros((m, n_params))

    row = 0
    for i, (view, E) in enumerate(zip(corr.views, extrinsics)):
        n = view.n_points
        w = np.asarray(E.axis_angle)
        d = _world3(view) - E.t[None, :]
        pc, dpc_dw = _rotation_transpose_apply_jacobian(w, d)
        z = pc[:, 2]
        if np.any(z <= 0.0):
            raise DepthNotPositive(
                f"view {view.view_id} has points at non-positive depth"
            )
        x = pc[:, 0] / z
        y = pc[:, 1] / z
        r = np.hypot(x, y)
        f = warp_factor(spec, r)
        slope_over_r = np.where(r > 1e-12, warp_slope(spec, r) / np.where(r > 1e-12, r, 1.0), 0.0)
        xd, yd = x * f, y * f

        u = A.alpha * xd + A.gamma * yd + A.u0
        v = A.beta * yd + A.v0
        res[row : row + 2 * n : 2] = u - view.pixels[:, 0]
        res[row + 1 : row + 2 * n : 2] = v - view.pixels[:, 1]

        # d(pixel)/d(intrinsics), columns [alpha, beta, gamma, u0, v0]
        jac[row : row + 2 * n : 2, 0] = xd
        jac[row : row + 2 * n : 2, 2] = yd
        jac[row : row + 2 * n : 2, 3] = 1.0
        jac[row + 1 : row + 2 * n : 2, 1] = yd
        jac[row + 1 : row + 2 * n : 2, 4] = 1.0

        # d(pixel)/d(coefficients) through the warp basis
        basis = coefficient_basis(model, r)
        dxd_dk = x[:, None] * basis
        dyd_dk = y[:, None] * basis
        jac[row : row + 2 * n : 2, 5 : 5 + nk] = A.alpha * dxd_dk + A.gamma * dyd_dk
        jac[row + 1 : row + 2 * n : 2, 5 : 5 + nk] = A.beta * dyd_dk

        # d(distorted)/d(normalized): f on the diagonal plus the radial term
        D = np.empty((n, 2, 2))
        D[:, 0, 0] = f + x * x * slope_over_r
        D[:, 0, 1] = x * y * slope_over_r
        D[:, 1, 0] = D[:, 0, 1]
        D[:, 1, 1] = f + y * y * slope_over_r

        MA = np.array([[A.alpha, A.gamma], [0.0, A.beta]])
        dpix_dxy = np.einsum("ab,nbc->nac", MA, D)

        dxy_dpc = np.zeros((n, 2, 3))
        dxy_dpc[:, 0, 0] = 1.0 / z
        dxy_dpc[:, 0, 2] = -x / z
        dxy_dpc[:, 1, 1] = 1.0 / z
        dxy_dpc[:, 1, 2] = -y / z

        dpix_dpc = np.einsum("nab,nbc->nac", dpix_dxy, dxy_dpc)
        dpix_dwv = np.einsum("nab,nbc->nac", dpix_dpc, dpc_dw)
        # pc = R^T (P - t): the translation enters only through d = P - t.
        dpix_dt = np.einsum("nab,bc->nac", dpix_dpc, -E.rotation.T)

        col = 5 + nk + 6 * i
        jac[row : row + 2 * n : 2, col : col + 3] = dpix_dwv[:, 0, :]
        jac[row + 1 : row + 2 * n : 2, col : col + 3] = dpix_dwv[:, 1, :]
        jac[row : row + 2 * n : 2, col + 3 : col + 6] = dpix_dt[:, 0, :]
        jac[row + 1 : row + 2 * n : 2, col + 3 : col + 6] = dpix_dt[:, 1, :]
        row += 2 * n
    return res, jac


def objective_gradient(
    corr: CorrespondenceSet,
    A: IntrinsicMatrix,
    spec: DistortionSpec,
    extrinsics: Sequence[ViewExtrinsics],
) -> np.ndarray:
    """Gradient of the objective with respect to the packed parameter vector."""
    theta = _pack_params(A, spec, extrinsics)
    res, jac = _residuals_and_jacobian(theta, corr, spec.model)
    return 2.0 * jac.T @ res


# ---------------------------------------------------------------------------
# Levenberg-Marquardt refinement


def _levenberg_marquardt(
    eval_fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    x0: np.ndarray,
    opts: OptimizerOptions,
) -> tuple[np.ndarray, int, int, bool, str]:
    """Damped Gauss-Newton descent honoring all four stopping thresholds.

    Only improving steps are accepted, so the final cost never exceeds the
    initial one. Steps that throw DepthNotPositive are treated as rejected
    trial points (damping increases and the step shrinks).
    """
    x = np.array(x0, dtype=float)
    res, jac = eval_fn(x)
    n_fev = 1
    cost = float(res @ res)
    identity = np.eye(x.size)
    mu = -1.0
    nu = 2.0
    converged = False
    reason = "iteration limit reached"
    n_iter = 0

    while n_iter < opts.max_iter:
        n_iter += 1
        grad = jac.T @ res
        hess = jac.T @ jac
        if mu < 0.0:
            dmax = float(hess.diagonal().max())
            mu = 1e-3 * (dmax if dmax > 0.0 else 1.0)

        accepted = False
        while True:
            try:
                delta = np.linalg.solve(hess + mu * identity, -grad)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(hess + mu * identity, -grad, rcond=None)[0]
            if float(np.max(np.abs(delta) / (1.0 + np.abs(x)))) <= opts.tol_x:
                converged = True
                reason = "step below tol_x"
                break
            if n_fev >= opts.max_fun_evals:
                reason = "function evaluation limit reached"
                break
            trial = x + delta
            try:
                res_new, jac_new = eval_fn(trial)
                n_fev += 1
                cost_new = float(res_new @ res_new)
            except (DepthNotPositive, ValueError):
                # Invalid trial point (behind-camera or out-of-domain params):
                # reject and shrink the step.
                n_fev += 1
                cost_new = math.inf
            if cost_new < cost:
                gain_den = float(delta @ (mu * delta - grad))
                rho = (cost - cost_new) / gain_den if gain_den > 0.0 else 1.0
                mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                nu = 2.0
                decrease = cost - cost_new
                x, res, jac, cost = trial, res_new, jac_new, cost_new
                if decrease <= opts.tol_fun * (1.0 + cost_new):
                    converged = True
                    reason = "objective decrease below tol_fun"
                accepted = True
                break
            mu *= nu
            nu *= 2.0
            if not math.isfinite(mu) or mu > 1e32:
                reason = "damping overflow (no descent direction)"
                break
        if converged or not accepted:
            break
    return x, n_iter, n_fev, converged, reason


def _build_result(
    corr: CorrespondenceSet,
    A: IntrinsicMatrix,
    spec: DistortionSpec,
    extrinsics: tuple[ViewExtrinsics, ...],
    converged: bool = True,
    n_iterations: int = 0,
    j_init: float | None = None,
    stop_reason: str = "",
) -> CalibrationResult:
    residuals = []
    total = 0.0
    n_total = 0
    for view, E in zip(corr.views, extrinsics):
        diff = _predict_pixels(view, A, spec, E) - view.pixels
        dist = np.linalg.norm(diff, axis=1)
        dist.setflags(write=False)
        residuals.append(dist)
        total += float(np.sum(dist * dist))
        n_total += view.n_points
    return CalibrationResult(
        intrinsics=A,
        distortion=spec,
        view_ids=tuple(v.view_id for v in corr.views),
        extrinsics=extrinsics,
        j_final=total,
        rms_px=math.sqrt(total / n_total),
        per_point_residuals=tuple(residuals),
        converged=converged,
        n_iterations=n_iterations,
        j_init=j_init,
        stop_reason=stop_reason,
    )


def refine(
    corr: CorrespondenceSet,
    init: CalibrationResult,
    opts: OptimizerOptions = OptimizerOptions(),
) -> CalibrationResult:
    """Jointly refine intrinsics, distortion, and all view poses.

    Never increases the objective relative to the initialization. On hitting
    an iteration or evaluation cap, the best parameters so far are returned
    with ``converged=False`` rather than raising.
    """
    model = init.distortion.model
    theta0 = _pack_params(init.intrinsics, init.distortion, init.extrinsics)
    theta, n_iter, _, converged, reason = _levenberg_marquardt(
        lambda th: _residuals_and_jacobian(th, corr, model), theta0, opts
    )
    A, spec, extrinsics = _unpack_params(theta, model, corr.n_views)
    return _build_result(
        corr,
        A,
        spec,
        extrinsics,
        converged=converged,
        n_iterations=n_iter,
        j_init=init.j_final,
        stop_reason=reason,
    )


# ---------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class _LinearStage:
    corr: CorrespondenceSet
    homographies: tuple[Homography, ...]
    intrinsics: IntrinsicMatrix
    extrinsics: tuple[ViewExtrinsics, ...]
    dropped: tuple[int, ...]


def _linear_stage(corr: CorrespondenceSet) -> _LinearStage:
    kept = []
    homographies = []
    dropped = []
    for view in corr.views:
        try:
            homographies.append(estimate_homography(view))
            kept.append(view)
        except DegenerateConfiguration as exc:
            dropped.append(view.view_id)
            warnings.warn(
                f"dropping view {view.view_id}: {exc}", RuntimeWarning, stacklevel=3
            )
    if len(kept) < 3:
        raise DegenerateConfiguration(
            f"calibration needs at least 3 usable views, got {len(kept)}"
        )
    corr_kept = CorrespondenceSet(tuple(kept))
    A = intrinsics_from_homographies(homographies)
    extrinsics = tuple(extrinsics_from_homography(H, A) for H in homographies)
    return _LinearStage(corr_kept, tuple(homographies), A, extrinsics, tuple(dropped))


def calibrate(
    corr: CorrespondenceSet,
    model: Model,
    opts: OptimizerOptions = OptimizerOptions(),
) -> CalibrationResult:
    """Full pipeline: linear estimation, distortion guess, then refinement."""
    stage = _linear_stage(corr)
    spec0 = init_distortion(stage.corr, stage.intrinsics, stage.extrinsics, model)
    init = _build_result(stage.corr, stage.intrinsics, spec0, stage.extrinsics)
    return refine(stage.corr, init, opts)


def compare_models(
    corr: CorrespondenceSet,
    opts: OptimizerOptions = OptimizerOptions(),
) -> ComparisonReport:
    """Refine all three distortion models from one shared linear start.

    The distortion initialization is re-fit per model (the linear intrinsics
    and poses are shared); a model that fails is reported inline without
    stopping the others.
    """
    stage = _linear_stage(corr)
    entries = []
    for model in (Model.MODEL1, Model.MODEL2, Model.MODEL3):
        try:
            spec0 = init_distortion(stage.corr, stage.intrinsics, stage.extrinsics, model)
            init = _build_result(stage.corr, stage.intrinsics, spec0, stage.extrinsics)
            result = refine(stage.corr, init, opts)
            entries.append(
                ModelReport(
                    model=model,
                    result=result,
                    init_coefficients=spec0.coefficients,
                )
            )
        except Exception as exc:  # noqa: BLE001 - reported inline by contract
            entries.append(
                ModelReport(
                    model=model,
                    result=None,
                    init_coefficients=None,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return ComparisonReport(tuple(entries))
