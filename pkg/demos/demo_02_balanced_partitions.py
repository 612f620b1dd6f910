#!/usr/bin/env python3
"""Control-balanced dyadic partitions: balance points by bisection, the
recursive construction, and the halving property."""

import numpy as np

from roughsig import (
    Control,
    PiecewiseLinearPath,
    arc_length_control,
    balance_point,
    balance_residuals,
    max_subinterval_control,
    total_dyadic_partition,
)

print("== Balance points ==")
uniform = Control(lambda s, t: t - s, "t-s")
print(f"omega = t - s on (0,1): balance point {balance_point(uniform, 0, 1):.6f}")

quadratic = Control(lambda s, t: t**2 - s**2, "t^2-s^2")
u = balance_point(quadratic, 0.0, 1.0)
print(f"omega = t^2 - s^2 on (0,1): balance point {u:.10f} vs sqrt(1/2) = {np.sqrt(0.5):.10f}")

corner = PiecewiseLinearPath([0, 0.5, 1], [[0, 0], [1, 0], [1, 1]])
ctrl = arc_length_control(corner)
print(f"equal-length L-path, arc-length omega: balance point {balance_point(ctrl, 0, 1):.6f}")

print()
print("== Total dyadic partitions ==")
part = total_dyadic_partition(uniform, 0.0, 1.0, 2)
print(f"uniform control, order 2: {part.points}")

rng = np.random.default_rng(3)
pts = np.vstack([np.zeros(2), np.cumsum(rng.uniform(-0.5, 0.8, (8, 2)), axis=0)])
path = PiecewiseLinearPath(np.linspace(0, 1, 9), pts)
ctrl = arc_length_control(path)
total = float(ctrl(0.0, 1.0))
print(f"random 8-segment path, arc length omega(0,1) = {total:.4f}")
for K in (2, 4, 6):
    part = total_dyadic_partition(ctrl, 0.0, 1.0, K)
    worst = float(np.max(balance_residuals(part, ctrl)))
    frac = max_subinterval_control(part, ctrl) / total
    print(
        f"  order {K}: {2**K} subintervals, worst balance residual {worst:.2e}, "
        f"max omega fraction {frac:.6f} (halving bound {1 / 2**K:.6f})"
    )

print()
print("== Nesting ==")
p4 = total_dyadic_partition(ctrl, 0.0, 1.0, 4)
p5 = total_dyadic_partition(ctrl, 0.0, 1.0, 5)
nested = np.array_equal(p5.points[::2], p4.points)
print(f"order-4 points are exactly every other order-5 point: {nested}")
print("every coarsening of a total partition is itself balanced, so the")
print("refinement-increment machinery can reuse one nested family of points.")
