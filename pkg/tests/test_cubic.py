import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radialcal.cubic import (
    CubicCoeffs,
    RootSet,
    real_roots,
    undistort_component,
    undistort_xy,
)
from oracles import bisect_cubic_roots, cubic_residual, forward_component_model3


def residual_scale(c: CubicCoeffs, x: float) -> float:
    # Backward-error denominator: the bound a float evaluation can honor.
    ax = abs(x)
    return max(1.0, abs(c.y)) + ax + abs(c.p) * (ax * ax) + abs(c.q) * (ax * ax * ax)


class TestRealRoots:
    def test_linear_case(self):
        roots = real_roots(CubicCoeffs(y=0.42, p=0.0, q=0.0))
        assert roots.roots == (0.42,)

    def test_single_real_root_with_complex_pair_discarded(self):
        # x^3 + x^2 + x - 3 = (x - 1)(x^2 + 2x + 3); the quadratic factor has
        # negative discriminant, so only x = 1 survives.
        roots = real_roots(CubicCoeffs(y=3.0, p=1.0, q=1.0))
        assert len(roots) == 1
        assert math.isclose(roots.roots[0], 1.0, abs_tol=1e-12)

    def test_quadratic_degenerate_two_roots(self):
        # x^2 + x - 2 = (x + 2)(x - 1)
        roots = real_roots(CubicCoeffs(y=2.0, p=1.0, q=0.0))
        assert np.allclose(roots.roots, [-2.0, 1.0], atol=1e-12)

    def test_quadratic_degenerate_no_real_roots(self):
        roots = real_roots(CubicCoeffs(y=-1.0, p=1.0, q=0.0))
        assert len(roots) == 0

    def test_three_distinct_real_roots(self):
        # (x-1)(x-2)(x-3) = 0 scaled so the linear coefficient is one.
        roots = real_roots(CubicCoeffs(y=6.0 / 11.0, p=-6.0 / 11.0, q=1.0 / 11.0))
        assert np.allclose(roots.roots, [1.0, 2.0, 3.0], atol=1e-10)

    def test_triple_root(self):
        # q = 1/(3a^2), p = -1/a, y = a/3 makes (x - a)^3 after scaling; a = 1.
        roots = real_roots(CubicCoeffs(y=1.0 / 3.0, p=-1.0, q=1.0 / 3.0))
        assert len(roots) == 3
        assert np.allclose(roots.roots, 1.0, atol=1e-6)

    def test_tiny_q_routes_to_quadratic(self):
        with_q = real_roots(CubicCoeffs(y=2.0, p=1.0, q=1e-20))
        without = real_roots(CubicCoeffs(y=2.0, p=1.0, q=0.0))
        assert len(with_q) == len(without)
        assert np.allclose(with_q.roots, without.roots, atol=1e-12)

    def test_rootset_orders_and_caps(self):
        assert RootSet((3.0, 1.0, 2.0)).roots == (1.0, 2.0, 3.0)
        with pytest.raises(ValueError):
            RootSet((1.0, 2.0, 3.0, 4.0))

    @given(
        st.floats(-3.0, 3.0),
        st.floats(-2.0, 2.0),
        st.floats(-2.0, 2.0),
    )
    @settings(max_examples=500)
    def test_every_root_satisfies_cubic(self, y, p, q):
        c = CubicCoeffs(y=y, p=p, q=q)
        for x in real_roots(c):
            assert abs(cubic_residual(y, p, q, x)) <= 1e-9 * residual_scale(c, x)

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(42)
        n = 20000
        ys = rng.uniform(-3.0, 3.0, n)
        ps = rng.uniform(-2.0, 2.0, n)
        qs = rng.uniform(-2.0, 2.0, n)
        oracle_roots, oracle_counts = bisect_cubic_roots(ys, ps, qs)
        for i in range(n):
            L = 10.0 * (1.0 + abs(ys[i]))
            mine = [x for x in real_roots(CubicCoeffs(ys[i], ps[i], qs[i])) if abs(x) <= L]
            assert len(mine) == oracle_counts[i], (ys[i], ps[i], qs[i])
            for got, want in zip(mine, oracle_roots[i]):
                assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


class TestUndistortComponent:
    def test_zero_maps_to_zero(self):
        assert undistort_component(0.0, 1.7, -0.1, -0.05) == 0.0

    def test_inverts_forward_evaluation(self):
        # Forward oracle at x = 0.3, c = 4/3 gives x_d = 0.28125 exactly.
        k1, k2, c = -0.1, -0.05, 4.0 / 3.0
        x_d = forward_component_model3(0.3, c, k1, k2)
        assert math.isclose(x_d, 0.28125, abs_tol=1e-15)
        x = undistort_component(x_d, c, k1, k2)
        assert math.isclose(x, 0.3, abs_tol=1e-9)

    def test_odd_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            k1, k2 = rng.uniform(-0.3, 0.3, 2)
            c = rng.uniform(-5.0, 5.0)
            x = rng.uniform(-0.8, 0.8)
            x_d = forward_component_model3(x, c, k1, k2)
            plus = undistort_component(x_d, c, k1, k2)
            minus = undistort_component(-x_d, c, k1, k2)
            assert abs(plus + minus) <= 1e-12 * max(1.0, abs(plus))


class TestUndistortXY:
    def test_origin_fixed(self):
        assert undistort_xy(0.0, 0.0, -0.1, -0.05) == (0.0, 0.0)

    def test_y_axis_case_solved_by_swapped_axes(self):
        k1, k2 = -0.1, -0.05
        y = 0.45
        y_d = forward_component_model3(y, 0.0, k1, k2)
        got = undistort_xy(0.0, y_d, k1, k2)
        assert got[0] == 0.0
        assert math.isclose(got[1], y, abs_tol=1e-9)

    def test_documented_round_trip(self):
        x, y = undistort_xy(0.28125, 0.375, -0.1, -0.05)
        assert math.isclose(x, 0.3, abs_tol=1e-9)
        assert math.isclose(y, 0.4, abs_tol=1e-9)

    def test_random_round_trips_on_monotone_specs(self):
        from radialcal.distortion import DistortionSpec, Model, WorkingDomain, validate_monotone

        rng = np.random.default_rng(19)
        dom = WorkingDomain(0.8)
        checked = 0
        while checked < 20:
            k1, k2 = rng.uniform(-0.3, 0.3, 2)
            spec = DistortionSpec(Model.MODEL3, k1, k2)
            if not validate_monotone(spec, dom):
                continue
            checked += 1
            for _ in range(100):
                r = 0.8 * math.sqrt(rng.uniform(0, 1))
                phi = rng.uniform(-math.pi, math.pi)
                x, y = r * math.cos(phi), r * math.sin(phi)
                f = 1.0 + k1 * r + k2 * r * r
                got = undistort_xy(x * f, y * f, k1, k2)
                assert math.hypot(got[0] - x, got[1] - y) <= 1e-9

    def test_unique_admissible_root_on_monotone_domain(self):
        # Within the validated radius interval the matching-sign branch holds
        # exactly one root, so the final closest-to-observation tie-break can
        # never pick a wrong in-domain candidate.
        from radialcal.distortion import DistortionSpec, Model, WorkingDomain, validate_monotone

        rng = np.random.default_rng(31)
        r_max = 0.8
        dom = WorkingDomain(r_max)
        checked = 0
        while checked < 10:
            k1, k2 = rng.uniform(-0.3, 0.3, 2)
            if not validate_monotone(DistortionSpec(Model.MODEL3, k1, k2), dom):
                continue
            checked += 1
            for _ in range(200):
                x = rng.uniform(1e-3, r_max / math.sqrt(2))
                c = rng.uniform(-1.0, 1.0)
                x_d = forward_component_model3(x, c, k1, k2)
                scale = 1.0 + c * c
                roots = real_roots(
                    CubicCoeffs(y=x_d, p=k1 * math.sqrt(scale), q=k2 * scale)
                )
                in_domain = [
                    t
                    for t in roots
                    if t > 1e-14 and abs(t) * math.sqrt(scale) <= r_max * (1 + 1e-9)
                ]
                assert len(in_domain) == 1
