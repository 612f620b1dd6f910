#!/usr/bin/env python3
"""Signatures of piecewise-linear paths: closed forms, Chen concatenation,
and a grid-quadrature cross-check."""

import numpy as np

from roughsig import (
    PiecewiseLinearPath,
    one_variation,
    segment_signature,
    signature,
    level_norms,
    truncated_product,
)
from roughsig.quadrature import iterated_riemann_levels

print("== A single straight segment ==")
v = np.array([0.3, -0.7])
sig = segment_signature(v, depth=4)
print(f"increment v = {v}: level k of the signature is v^(tensor k)/k!")
for k in range(5):
    print(f"  level {k}: {np.round(sig.level(k), 6)}")

print()
print("== Chen's identity on an L-shaped path ==")
path = PiecewiseLinearPath([0.0, 0.5, 1.0], [[0, 0], [1, 0], [1, 1]])
full = signature(path, 0.0, 1.0, 2)
print("signature of (0,0) -> (1,0) -> (1,1), depth 2:")
print(f"  level 1: {full.level(1)}   (total displacement)")
print(f"  level 2: {full.level(2)}   (the 1.0 cross term is the area block)")

left = signature(path, 0.0, 0.5, 2)
right = signature(path, 0.5, 1.0, 2)
glued = truncated_product(left, right)
err = max(np.max(np.abs(a - b)) for a, b in zip(glued.levels, full.levels))
print(f"concatenating the two halves reproduces it: max error {err:.2e}")

print()
print("== Arc length is the level-1 control ==")
tri = PiecewiseLinearPath([0, 1], [[0, 0], [3, 4]])
print(f"(0,0) -> (3,4): one_variation = {one_variation(tri, 0, 1)} (Pythagoras)")

print()
print("== Independent quadrature cross-check ==")
rng = np.random.default_rng(7)
pts = np.vstack([np.zeros(2), np.cumsum(rng.uniform(-0.4, 0.6, (6, 2)), axis=0)])
wiggly = PiecewiseLinearPath(np.linspace(0, 1, 7), pts)
sig = signature(wiggly, 0.0, 1.0, 4)
print("random 6-segment path; trapezoid-tag iterated Riemann sums vs exact:")
for grid in (512, 2048, 8192):
    levels = iterated_riemann_levels(wiggly, 4, grid)
    rel = max(
        np.linalg.norm(levels[n] - sig.level(n)) / np.linalg.norm(sig.level(n))
        for n in range(1, 5)
    )
    print(f"  grid {grid:5d}: worst relative error {rel:.3e}")
print("errors fall faster than the grid step: the two routes agree.")
print()
print("per-level norms of the example:", np.round(level_norms(sig), 5))
