"""Real-root extraction for ``y = x + p x^2 + q x^3`` and the candidate-selection
algorithm that inverts the odd quadratic radial warp component-wise.

The cubic is solved through the depressed-cubic substitution with the
trigonometric method in the three-real-root regime and a cancellation-safe
Cardano form otherwise, followed by a short Newton polish on the original
equation. This is numerically equivalent to the textbook radical formulas but
avoids complex intermediates and the division by ``q`` they require.

The discriminant of the depressed cubic is itself a difference of two
near-equal quantities once the coefficients span many decades, so its sign
(the 1-versus-3 real root decision) is only trusted when it clears the
cancellation noise floor; otherwise the root multiset is rebuilt by deflating
the polynomial at one verified root, which turns the remaining count decision
into a well-conditioned quadratic discriminant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Relative threshold under which the cubic degenerates to a quadratic; the
# radical formulas divide by q, so tiny q must be routed away explicitly.
_Q_NEGLIGIBLE = 1e-14
# Roots this close to zero belong to the x = 0 branch of the selection
# algorithm, not to the strict-sign branches.
_ZERO_ROOT = 1e-14
# Observed components this small are zero at working precision: solving for
# them would push the matching root under the sign-branch floor (and c =
# y_d / x_d toward overflow), while answering 0 is within 1e-12 absolutely.
_INPUT_ZERO = 1e-12
# |disc| below this multiple of its own term magnitudes is considered
# indistinguishable from rounding noise.
_DISC_MARGIN = 1e-9


class NoRealSolution(ValueError):
    """No admissible real root exists; the point lies outside model validity."""


def _cbrt(x: float) -> float:
    # math.cbrt only exists on 3.11+; pow on the magnitude keeps the sign exact.
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients of ``y = x + p x^2 + q x^3`` (observed value plus warp terms)."""

    y: float
    p: float
    q: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.y, self.p, self.q))):
            raise ValueError("cubic coefficients must be finite")

    def residual(self, x: float) -> float:
        # Multiplication chains overflow quietly to inf; x ** 3 would raise.
        return x + self.p * (x * x) + self.q * (x * x * x) - self.y


@dataclass(frozen=True)
class RootSet:
    """Real solutions in ascending order, with multiplicity, at most three."""

    roots: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.roots) > 3:
            raise ValueError("a cubic has at most three real roots")
        object.__setattr__(self, "roots", tuple(sorted(self.roots)))

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)


def _polish(y: float, p: float, q: float, x: float, steps: int = 50) -> float:
    """Guarded Newton iteration on the original cubic.

    Converges in two or three steps from closed-form values; the larger step
    budget only matters for starts produced in ill-conditioned regimes.
    """
    for _ in range(steps):
        xx = x * x
        g = x + p * xx + q * (xx * x) - y
        dg = 1.0 + 2.0 * p * x + 3.0 * q * xx
        if dg == 0.0 or not math.isfinite(g):
            break
        step = g / dg
        x_new = x - step
        if not math.isfinite(x_new):
            break
        x = x_new
        if abs(step) <= 1e-16 * (1.0 + abs(x)):
            break
    return x


def _fast_polish(y: float, p: float, q: float, x: float) -> float | None:
    """Newton polish fused with the residual check; None when unverified.

    Only for starts from a decisively-branched closed form, which are within
    a few Newton steps of full precision. NaN propagation is benign: the
    final residual comparison fails and the caller falls back to the
    deflation repair path.
    """
    for _ in range(6):
        xx = x * x
        g = x + p * xx + q * (xx * x) - y
        dg = 1.0 + 2.0 * p * x + 3.0 * q * xx
        if dg == 0.0:
            break
        step = g / dg
        x = x - step
        if abs(step) <= 1e-16 * (1.0 + abs(x)):
            break
    ax = abs(x)
    res = x + p * (x * x) + q * (x * x * x) - y
    scale = max(1.0, abs(y)) + ax + abs(p) * (ax * ax) + abs(q) * (ax * ax * ax)
    if math.isfinite(res) and abs(res) <= 1e-9 * scale:
        return x
    return None


def _is_true_root(y: float, p: float, q: float, x: float) -> bool:
    ax = abs(x)
    scale = max(1.0, abs(y)) + ax + abs(p) * (ax * ax) + abs(q) * (ax * ax * ax)
    res = x + p * (x * x) + q * (x * x * x) - y
    # Candidates whose terms overflow cannot be verified (or refuted) in
    # double arithmetic; never return them.
    return math.isfinite(res) and math.isfinite(scale) and abs(res) <= 1e-9 * scale


def _any_root_bisect(y: float, p: float, q: float) -> float:
    """Defensive fallback: one guaranteed real root by bisection.

    All roots lie within the Cauchy bound, beyond which the cubic term
    dominates and fixes the sign of the residual.
    """
    M = 1.0 + max(abs(p), 1.0, abs(y)) / abs(q)
    a, b = -M, M
    ga = a + p * a * a + q * (a * a * a) - y
    if ga == 0.0:
        return a
    if ga > 0.0:
        a, b = b, a
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = mid + p * mid * mid + q * (mid * mid * mid) - y
        if gm == 0.0:
            return mid
        if gm < 0.0:
            a = mid
        else:
            b = mid
        if abs(b - a) <= 1e-15 * (1.0 + abs(mid)):
            break
    return 0.5 * (a + b)


def _quadratic_path(y: float, p: float, q: float) -> tuple[float, ...]:
    """Roots when the cubic term is negligible: ``p x^2 + x - y = 0``.

    The dropped ``q x^3`` term can still dominate at the quadratic's far root
    when p is itself tiny, so candidates are kept only if they satisfy the
    full cubic.
    """
    if abs(p) < 1e-300:
        candidates: tuple[float, ...] = (y,)
    else:
        disc = 1.0 + 4.0 * p * y
        if disc < 0.0:
            return ()
        sq = math.sqrt(disc)
        # Citardauq pairing avoids cancellation between 1 and sqrt(disc).
        u = -0.5 * (1.0 + sq)
        if disc == 0.0:
            candidates = (u / p, u / p)
        else:
            candidates = (u / p, -y / u)
    polished = (_polish(y, p, q, x) for x in candidates)
    return tuple(x for x in polished if _is_true_root(y, p, q, x))


def _deflated_pair(y: float, p: float, q: float, anchor: float) -> tuple[float, ...]:
    """The other two roots given one exact root, via stable deflation.

    Coefficients of ``q x^2 + beta x + gamma`` come from the symmetric
    functions of the remaining pair; ``gamma = y / anchor`` is a plain
    division, and ``beta`` falls back to the symmetric-function form when
    the synthetic-division expression cancels.
    """
    if anchor == 0.0:
        # Only possible when y = 0: the cubic factors as x (q x^2 + p x + 1).
        beta, gamma = p, 1.0
    else:
        gamma = y / anchor
        beta = p + q * anchor
        if abs(beta) < 1e-6 * (abs(p) + abs(q * anchor)):
            beta = -(1.0 - y / anchor) / anchor
    disc2 = beta * beta - 4.0 * q * gamma
    if disc2 < 0.0:
        # A tiny negative value is rounding noise around a genuine double
        # root; a decisively negative one means a complex pair.
        if disc2 < -4e-15 * (beta * beta + abs(4.0 * q * gamma)):
            return ()
        disc2 = 0.0
    sq2 = math.sqrt(disc2)
    u2 = -0.5 * (beta + math.copysign(sq2, beta if beta != 0.0 else 1.0))
    if u2 == 0.0:
        return (0.0, 0.0)
    return (u2 / q, gamma / u2)


def _solve_cubic(y: float, p: float, q: float, sign: int = 0) -> tuple[float, ...]:
    """All real roots as a plain tuple (unsorted); the core of real_roots.

    ``sign`` is a pre-filter hint from the sign-branch algorithm: +1 (-1)
    means only positive (negative) roots will be used, letting the fast
    paths skip polishing candidates of the wrong sign. Candidates too close
    to zero for their raw sign to be trusted are always polished.
    """
    if abs(q) < _Q_NEGLIGIBLE * (1.0 + abs(p)):
        return _quadratic_path(y, p, q)

    # Monic form x^3 + B x^2 + C x + D, then depressed via x = z - B/3.
    B = p / q
    C = 1.0 / q
    D = -y / q
    shift = B / 3.0
    P = C - B * B / 3.0
    Q = 2.0 * B ** 3 / 27.0 - B * C / 3.0 + D
    half = 0.5 * Q
    third = P / 3.0
    cube = third * third * third
    disc = half * half + cube
    noise = half * half + abs(cube)

    sign_tol = 1e-6 * (1.0 + abs(y))

    if disc > _DISC_MARGIN * noise:
        # Decisively one real root. Pick the large-magnitude cube root first
        # and recover the other factor through u v = -P/3, which dodges the
        # cancellation between Q and sqrt(disc).
        sq = math.sqrt(disc)
        u = _cbrt(-half + sq)
        v = _cbrt(-half - sq)
        if abs(u) >= abs(v):
            z = u - third / u if u != 0.0 else 0.0
        else:
            z = v - third / v
        raw = z - shift
        if sign != 0 and raw * sign < -sign_tol:
            return ()
        x = _fast_polish(y, p, q, raw)
        if x is not None:
            return (x,)
    elif disc < -_DISC_MARGIN * noise:
        # Decisively three real roots, pairwise separated by the same margin
        # (casus irreducibilis): trigonometric form.
        m = 2.0 * math.sqrt(-third)
        arg = 3.0 * Q / (P * m)
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        phi = math.acos(arg)
        out = []
        failed = False
        for k in (0.0, 2.0 * math.pi, 4.0 * math.pi):
            raw = m * math.cos((phi + k) / 3.0) - shift
            if sign != 0 and raw * sign < -sign_tol:
                continue
            x = _fast_polish(y, p, q, raw)
            if x is None:
                failed = True
                break
            out.append(x)
        if not failed:
            return tuple(out)

    # Uncertain or failed-verification zone: the root multiset is rebuilt by
    # deflation from one verified anchor root (largest magnitude is the
    # best-conditioned choice). Covers wrong discriminant signs, root
    # clusters collapsing onto a critical point, and exact multiple roots.
    candidates = [
        _polish(y, p, q, z - shift)
        for z in ((_cbrt(-2.0 * half),) if P == 0.0 else ())
    ]
    if not candidates:
        sq = math.sqrt(abs(disc))
        u = _cbrt(-half + sq)
        z = u - third / u if u != 0.0 else 0.0
        candidates.append(_polish(y, p, q, z - shift))
    verified = [x for x in candidates if _is_true_root(y, p, q, x)]
    anchor = (
        max(verified, key=abs)
        if verified
        else _polish(y, p, q, _any_root_bisect(y, p, q))
    )
    pair = (_polish(y, p, q, x) for x in _deflated_pair(y, p, q, anchor))
    return (anchor,) + tuple(x for x in pair if _is_true_root(y, p, q, x))


def real_roots(c: CubicCoeffs) -> RootSet:
    """All real solutions of ``y = x + p x^2 + q x^3``.

    Degenerate leading coefficients fall back to the quadratic/linear cases;
    complex-conjugate pairs are never returned.
    """
    return RootSet(_solve_cubic(c.y, c.p, c.q))


def _branch_candidate(y: float, p: float, q: float, positive: bool) -> float | None:
    """Best root of one sign branch: solve, filter by sign, pick nearest to y."""
    best = None
    best_dist = math.inf
    for x in _solve_cubic(y, p, q, 1 if positive else -1):
        if x > _ZERO_ROOT if positive else x < -_ZERO_ROOT:
            dist = abs(x - y)
            if dist < best_dist:
                best, best_dist = x, dist
    return best


def undistort_component(x_d: float, c: float, k1: float, k2: float) -> float:
    """Invert ``x_d = x + k1 sqrt(1+c^2) sgn(x) x^2 + k2 (1+c^2) x^3`` for x.

    Candidate-selection algorithm: zero (at working precision) maps to zero;
    otherwise solve the positive-sign and negative-sign branches separately,
    keep the roots whose sign matches each branch's assumption, and return
    the candidate closest to the observed ``x_d``.
    """
    if abs(x_d) <= _INPUT_ZERO:
        return 0.0
    scale = 1.0 + c * c
    p = k1 * math.sqrt(scale)
    q = k2 * scale

    x_plus = _branch_candidate(x_d, p, q, positive=True)
    x_minus = _branch_candidate(x_d, -p, q, positive=False)

    if x_plus is None and x_minus is None:
        raise NoRealSolution(
            f"no sign-consistent real root for x_d={x_d!r} (k1={k1!r}, k2={k2!r})"
        )
    if x_plus is None:
        return x_minus
    if x_minus is None:
        return x_plus
    return x_plus if abs(x_plus - x_d) <= abs(x_minus - x_d) else x_minus


def undistort_xy(x_d: float, y_d: float, k1: float, k2: float) -> tuple[float, float]:
    """Component-wise inverse of the odd radial warp on the normalized plane.

    The x component is recovered from the scalar cubic with ``c = y_d / x_d``
    and y follows as ``c x``; a (relatively) zero x component swaps the roles
    of the axes, which also keeps ``c`` bounded.
    """
    if abs(x_d) <= _INPUT_ZERO * max(1.0, abs(y_d)):
        return 0.0, undistort_component(y_d, 0.0, k1, k2)
    c = y_d / x_d
    x = undistort_component(x_d, c, k1, k2)
    return x, c * x
