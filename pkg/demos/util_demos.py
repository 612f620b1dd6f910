"""Shared fixtures for the demo scripts."""

from roughsig import PiecewiseLinearPath


def zigzag() -> PiecewiseLinearPath:
    return PiecewiseLinearPath(
        [0.0, 0.2, 0.45, 0.7, 1.0],
        [[0.0, 0.0], [0.3, 0.15], [0.45, 0.5], [0.8, 0.6], [1.0, 1.0]],
    )


def rotation_driver() -> PiecewiseLinearPath:
    return PiecewiseLinearPath([0.0, 0.3, 0.7, 1.0], [[0.0], [0.45], [0.55], [1.0]])
