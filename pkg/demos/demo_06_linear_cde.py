#!/usr/bin/env python3
"""A linear controlled equation dx = A x dgamma solved two ways, plus the
flow-difference bound under driver perturbations."""

import math

import numpy as np

from roughsig import (
    LinearCdeProblem,
    beta_threshold,
    flow_difference_bound,
    shared_calibrated_control,
    sinusoid_perturbation,
    solve_exact,
    solve_exact_trajectory,
    solve_series,
)
from util_demos import rotation_driver

driver = rotation_driver()
A = np.array([[[0.0, -1.0], [1.0, 0.0]]])
problem = LinearCdeProblem(A, [1.0, 0.0], driver)

print("== Rotation flow ==")
print("A(v) = v * [[0,-1],[1,0]]: the state rotates by the driver increment")
t = 0.63
theta = driver.position(t)[0]
x = solve_exact(problem, t)
print(f"  x({t}) = {np.round(x, 10)}")
print(f"  (cos, sin)({theta:.4f}) = ({math.cos(theta):.10f}, {math.sin(theta):.10f})")
print(f"  operator norm estimate: {problem.operator_norm:.4f}")

print()
print("== Signature-series solution ==")
print("x_t = sum_n (iterated A action on x0) . (signature level n):")
exact = solve_exact(problem, 1.0)
for N in (0, 2, 4, 8, 12):
    err = np.linalg.norm(solve_series(problem, 1.0, N) - exact)
    print(f"  depth {N:2d}: |series - exact| = {err:.3e}")

print()
print("== Perturbing the driver ==")
beta = 1.05 * beta_threshold(1.0, 1.0)
tgrid = np.linspace(0.0, 1.0, 257)
xs = solve_exact_trajectory(problem, tgrid)
print(f"{'amplitude':>10} {'sup |x-y|':>12} {'bound':>12} {'sup/(eps(1+log2(C/eps)))':>25}")
for amp in (1e-1, 1e-2, 1e-3, 1e-4):
    drv2 = sinusoid_perturbation(driver, amp, cycles=3)
    prob2 = LinearCdeProblem(A, [1.0, 0.0], drv2)
    ctrl = shared_calibrated_control(driver, drv2, p=1.0, beta=beta)
    w01 = float(ctrl(0.0, 1.0))
    ys = solve_exact_trajectory(prob2, tgrid)
    sup = float(np.max(np.linalg.norm(xs - ys, axis=1)))
    bound = flow_difference_bound(problem, amp, w01, beta, w01)
    ratio = sup / (amp * (1.0 + math.log2(w01 / amp)))
    print(f"{amp:10.0e} {sup:12.4e} {bound:12.4e} {ratio:25.4e}")

print()
print("the solution difference tracks the perturbation size up to the")
print("logarithmic factor: the normalized ratios stay within a small band.")
