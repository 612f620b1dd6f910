import math

import numpy as np
import pytest

from roughsig import (
    LinearCdeProblem,
    PiecewiseLinearPath,
    flow_difference_bound,
    series_tail_bound,
    shared_calibrated_control,
    sinusoid_perturbation,
    solve_exact,
    solve_exact_trajectory,
    solve_series,
)
from scipy.linalg import expm

from oracles import rk4_linear_flow
from util import drift_path


def rotation_problem():
    driver = PiecewiseLinearPath([0.0, 0.3, 0.7, 1.0], [[0.0], [0.45], [0.55], [1.0]])
    A = np.array([[[0.0, -1.0], [1.0, 0.0]]])
    return LinearCdeProblem(A, [1.0, 0.0], driver)


def random_problem(rng, d, e, norm_cap=2.0):
    A = rng.standard_normal((d, e, e))
    driver = drift_path(rng, d, int(rng.integers(2, 8)), length=1.0)
    prob = LinearCdeProblem(A, rng.standard_normal(e), driver)
    # rescale so ||A|| * L <= norm_cap
    scale = norm_cap / (prob.operator_norm * driver.length)
    if scale < 1.0:
        prob = LinearCdeProblem(A * scale, prob.x0, driver)
    return prob


class TestProblemType:
    def test_validation(self):
        driver = rotation_problem().driver
        with pytest.raises(ValueError, match="square"):
            LinearCdeProblem(np.zeros((1, 2, 3)), [1.0, 0.0], driver)
        with pytest.raises(ValueError, match="x0"):
            LinearCdeProblem(np.zeros((1, 2, 2)), [1.0, 0.0, 0.0], driver)
        with pytest.raises(ValueError, match="dimension"):
            LinearCdeProblem(np.zeros((2, 2, 2)), [1.0, 0.0], driver)

    def test_apply(self):
        prob = rotation_problem()
        M = prob.apply([2.0])
        assert np.allclose(M, [[0.0, -2.0], [2.0, 0.0]])

    def test_operator_norm_rotation(self):
        assert rotation_problem().operator_norm == pytest.approx(1.001, rel=1e-9)

    def test_operator_norm_diagonal_pair(self):
        driver = drift_path(np.random.default_rng(0), 2, 3)
        A = np.stack([np.diag([2.0, 0.0]), np.diag([0.0, 1.0])])
        prob = LinearCdeProblem(A, [1.0, 1.0], driver)
        assert prob.operator_norm == pytest.approx(2.0 * 1.001, rel=1e-6)

    def test_operator_norm_dominates_samples(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            prob = random_problem(rng, 3, 3)
            vs = rng.standard_normal((500, 3))
            vs /= np.linalg.norm(vs, axis=1, keepdims=True)
            sampled = max(
                float(np.linalg.norm(prob.apply(v), ord=2)) for v in vs
            )
            assert prob.operator_norm >= sampled * (1 - 1e-9)

    def test_json_ingestion_bundled(self):
        from importlib import resources

        name = str(resources.files("roughsig.data") / "rotation_cde.json")
        prob = LinearCdeProblem.from_json(name)
        assert prob.d == 1 and prob.e == 2
        assert prob.driver.dim == 1


class TestSolveExact:
    def test_zero_coefficients_constant_flow(self):
        driver = rotation_problem().driver
        prob = LinearCdeProblem(np.zeros((1, 2, 2)), [0.3, -1.2], driver)
        for t in (0.0, 0.4, 1.0):
            assert np.allclose(solve_exact(prob, t), [0.3, -1.2])

    def test_scalar_exponential(self):
        driver = PiecewiseLinearPath([0.0, 1.0], [[0.0], [1.0]])
        prob = LinearCdeProblem(np.array([[[0.7]]]), [2.0], driver)
        for t in (0.2, 0.5, 1.0):
            assert solve_exact(prob, t)[0] == pytest.approx(
                2.0 * math.exp(0.7 * t), rel=1e-12
            )

    def test_rotation_closed_form(self):
        prob = rotation_problem()
        for t in (0.15, 0.5, 0.93):
            theta = prob.driver.position(t)[0]
            want = np.array([math.cos(theta), math.sin(theta)])
            assert np.allclose(solve_exact(prob, t), want, atol=1e-12)

    def test_against_rk4_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(3):
            prob = random_problem(rng, 2, 3)
            got = solve_exact(prob, 1.0)
            ref = rk4_linear_flow(prob.coefficients, prob.x0, prob.driver, 1.0)
            assert np.allclose(got, ref, atol=1e-8)

    def test_trajectory_matches_pointwise(self):
        prob = rotation_problem()
        ts = np.linspace(0.0, 1.0, 17)
        traj = solve_exact_trajectory(prob, ts)
        for t, row in zip(ts, traj):
            assert np.allclose(row, solve_exact(prob, float(t)), atol=1e-13)

    def test_flow_multiplicative_over_time_split(self):
        rng = np.random.default_rng(3)
        prob = random_problem(rng, 2, 2)
        u, t = 0.37, 0.81
        x_u = solve_exact(prob, u)
        # independent transition matrix over [u, t] from per-segment exponentials
        cuts = np.union1d(
            prob.driver.times[(prob.driver.times > u) & (prob.driver.times < t)],
            [u, t],
        )
        M = np.eye(2)
        for a, b in zip(cuts[:-1], cuts[1:]):
            inc = prob.driver.position(b) - prob.driver.position(a)
            M = expm(prob.apply(inc)) @ M
        assert np.allclose(M @ x_u, solve_exact(prob, t), atol=1e-12)


class TestSolveSeries:
    def test_depth_zero_is_initial_state(self):
        prob = rotation_problem()
        assert np.allclose(solve_series(prob, 0.8, 0), prob.x0)

    def test_rotation_depth12(self):
        prob = rotation_problem()
        for t in (0.4, 1.0):
            err = np.linalg.norm(solve_series(prob, t, 12) - solve_exact(prob, t))
            assert err <= 1e-9

    def test_tail_bound_random_problems(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            prob = random_problem(rng, 2, 2, norm_cap=2.0)
            err = np.linalg.norm(solve_series(prob, 1.0, 10) - solve_exact(prob, 1.0))
            assert err <= series_tail_bound(prob, 10) + 1e-14

    def test_converges_with_depth(self):
        prob = rotation_problem()
        errs = [
            np.linalg.norm(solve_series(prob, 1.0, N) - solve_exact(prob, 1.0))
            for N in (2, 4, 8, 12)
        ]
        assert all(b < a for a, b in zip(errs, errs[1:]))


class TestFlowDifferenceBound:
    def test_zero_coefficients(self):
        driver = rotation_problem().driver
        prob = LinearCdeProblem(np.zeros((1, 2, 2)), [1.0, 0.0], driver)
        assert flow_difference_bound(prob, 1e-3, 2.0, 16.8, 2.0) == 0.0

    def test_vanishes_with_epsilon(self):
        prob = rotation_problem()
        values = [
            flow_difference_bound(prob, eps, 2.0, 16.8, 2.0)
            for eps in (1e-1, 1e-3, 1e-6, 1e-9, 1e-12)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-10

    def test_dominates_measured_difference(self):
        prob = rotation_problem()
        beta = 16.8
        tgrid = np.linspace(0.0, 1.0, 129)
        xs = solve_exact_trajectory(prob, tgrid)
        for amp in (1e-2, 1e-3):
            drv2 = sinusoid_perturbation(prob.driver, amp, cycles=3)
            prob2 = LinearCdeProblem(prob.coefficients, prob.x0, drv2)
            ctrl = shared_calibrated_control(prob.driver, drv2, p=1.0, beta=beta)
            w01 = float(ctrl(0.0, 1.0))
            ys = solve_exact_trajectory(prob2, tgrid)
            sup = float(np.max(np.linalg.norm(xs - ys, axis=1)))
            assert sup <= flow_difference_bound(prob, amp, w01, beta, w01)
