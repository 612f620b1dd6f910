import numpy as np
import pytest
from scipy.optimize import brentq

from roughsig import (
    Control,
    DyadicPartition,
    NonMonotoneControlError,
    arc_length_control,
    balance_point,
    balance_residuals,
    max_subinterval_control,
    total_dyadic_partition,
)
from roughsig.partition import DEFAULT_TOL

from util import drift_path


def length_control():
    return Control(lambda s, t: t - s, "t-s")


class TestBalancePoint:
    def test_symmetric_control_midpoint(self):
        assert balance_point(length_control(), 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_quadratic_control(self):
        ctrl = Control(lambda s, t: t**2 - s**2, "t^2-s^2")
        u = balance_point(ctrl, 0.0, 1.0)
        assert u == pytest.approx(np.sqrt(0.5), abs=1e-10)

    def test_two_segment_arc_length(self):
        path_ctrl = arc_length_control(
            drift_path(np.random.default_rng(0), 2, 2)  # placeholder, replaced below
        )
        # equal-length legs balance exactly at the corner
        from roughsig import PiecewiseLinearPath

        path = PiecewiseLinearPath([0, 0.5, 1], [[0, 0], [1, 0], [1, 1]])
        ctrl = arc_length_control(path)
        assert balance_point(ctrl, 0.0, 1.0) == pytest.approx(0.5, abs=1e-10)

    def test_rejects_degenerate_order(self):
        with pytest.raises(ValueError, match="s < t"):
            balance_point(length_control(), 0.5, 0.5)

    def test_non_monotone_control_detected(self):
        # an atom at c makes f(u) jump across zero: no balance point exists
        c = 0.437

        def jumpy(s, t):
            s, t = np.asarray(s), np.asarray(t)
            return (t - s) + 0.4 * ((s < c) & (c <= t))

        with pytest.raises(NonMonotoneControlError, match="balance point"):
            balance_point(Control(jumpy, "jumpy"), 0.0, 1.0)

    def test_agrees_with_independent_root_finder(self):
        rng = np.random.default_rng(1)
        path = drift_path(rng, 2, 7)
        ctrl = arc_length_control(path)
        for s, t in np.sort(rng.random((10, 2)), axis=1):
            if t - s < 1e-2:
                continue
            u_bis = balance_point(ctrl, s, t, tol=1e-12)
            u_ref = brentq(lambda u: ctrl(s, u) - ctrl(u, t), s, t, xtol=1e-14)
            total = float(ctrl(s, t))
            # both residuals are within tolerance; points agree to 2 tol in omega
            assert abs(ctrl(s, u_bis) - ctrl(u_bis, t)) <= 2e-12 * total + 1e-14
            assert abs(ctrl(s, u_ref) - ctrl(u_ref, t)) <= 2e-12 * total + 1e-14


class TestTotalDyadicPartition:
    def test_uniform_control_k2(self):
        part = total_dyadic_partition(length_control(), 0.0, 1.0, 2)
        assert np.allclose(part.points, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)

    def test_k0_is_endpoints(self):
        part = total_dyadic_partition(length_control(), 0.2, 0.9, 0)
        assert np.array_equal(part.points, [0.2, 0.9])

    def test_residual_audit_random_path(self):
        rng = np.random.default_rng(2)
        path = drift_path(rng, 3, 9)
        ctrl = arc_length_control(path)
        part = total_dyadic_partition(ctrl, 0.0, 1.0, 4)
        residuals = balance_residuals(part, ctrl)
        assert residuals.size == sum(2**m for m in range(4))
        assert np.all(residuals <= 10 * DEFAULT_TOL)
        total = float(ctrl(0.0, 1.0))
        assert max_subinterval_control(part, ctrl) <= total / 2**4 * (1 + 1e-9)

    def test_nesting_bit_identical(self):
        rng = np.random.default_rng(3)
        path = drift_path(rng, 2, 6)
        ctrl = arc_length_control(path)
        p4 = total_dyadic_partition(ctrl, 0.0, 1.0, 4)
        p5 = total_dyadic_partition(ctrl, 0.0, 1.0, 5)
        assert np.array_equal(p5.points[::2], p4.points)
        assert np.array_equal(p5.subpartition(1).points, p4.points)

    def test_every_coarsening_is_balanced(self):
        rng = np.random.default_rng(4)
        path = drift_path(rng, 2, 5)
        ctrl = arc_length_control(path)
        part = total_dyadic_partition(ctrl, 0.1, 0.95, 3)
        total = float(ctrl(0.1, 0.95))
        for m in range(part.order + 1):
            sub = part.subpartition(m)
            pts = sub.points
            for j in range(1, pts.size - 1, 2):
                left = float(ctrl(pts[j - 1], pts[j]))
                right = float(ctrl(pts[j], pts[j + 1]))
                assert abs(left - right) <= 10 * DEFAULT_TOL * total

    def test_degenerate_control_uses_time_midpoints(self):
        zero = Control(lambda s, t: 0.0 * (np.asarray(t) - np.asarray(s)), "zero")
        part = total_dyadic_partition(zero, 0.0, 1.0, 2)
        assert np.allclose(part.points, [0, 0.25, 0.5, 0.75, 1.0])


class TestDyadicPartitionType:
    def test_point_count_enforced(self):
        with pytest.raises(ValueError, match="points"):
            DyadicPartition(np.array([0.0, 0.5, 1.0]), order=2)

    def test_strictly_increasing_enforced(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            DyadicPartition(np.array([0.0, 0.5, 0.5]), order=1)

    def test_json_dump(self):
        part = total_dyadic_partition(length_control(), 0.0, 1.0, 1)
        doc = part.to_json_dict()
        assert doc["schema"] == 1 and doc["order"] == 1
        assert doc["points"] == [0.0, 0.5, 1.0]
