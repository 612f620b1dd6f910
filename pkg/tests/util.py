"""Seeded fixture generators shared across test modules."""

import numpy as np

from roughsig import PiecewiseLinearPath


def random_times(rng, n_seg):
    times = np.concatenate([[0.0], np.sort(rng.random(n_seg - 1)), [1.0]])
    while np.any(np.diff(times) <= 0):
        times = np.concatenate([[0.0], np.sort(rng.random(n_seg - 1)), [1.0]])
    return times


def jittered_times(rng, n_seg, jitter=0.4):
    """Knots near the uniform grid: every segment keeps a time width of at
    least (1 - 2*jitter)/n_seg, so parametrization speed stays bounded and a
    uniform quadrature grid resolves every segment."""
    inner = (np.arange(1, n_seg) + jitter * rng.uniform(-1, 1, n_seg - 1)) / n_seg
    return np.concatenate([[0.0], inner, [1.0]])


def random_walk_path(rng, dim, n_seg, scale=1.5):
    """Plain random walk; levels may nearly cancel, fine for identities."""
    pts = np.cumsum(rng.standard_normal((n_seg + 1, dim)) * scale / np.sqrt(n_seg), axis=0)
    return PiecewiseLinearPath(random_times(rng, n_seg), pts)


def drift_path(rng, dim, n_seg, length=1.5, wobble=0.45, bounded_speed=False):
    """Drift-dominated path: healthy signature norms at every level, which
    keeps relative-error comparisons meaningful.  With bounded_speed the
    knots stay near the uniform grid (no segment shorter in time than a
    quadrature cell)."""
    drift = rng.standard_normal(dim)
    drift /= np.linalg.norm(drift)
    incs = drift[None, :] + wobble * rng.standard_normal((n_seg, dim))
    incs *= length / np.linalg.norm(incs, axis=1).sum()
    pts = np.vstack([np.zeros(dim), np.cumsum(incs, axis=0)])
    times = jittered_times(rng, n_seg) if bounded_speed else random_times(rng, n_seg)
    return PiecewiseLinearPath(times, pts)


ZIGZAG_TIMES = [0.0, 0.2, 0.45, 0.7, 1.0]
ZIGZAG_POINTS = [[0.0, 0.0], [0.3, 0.15], [0.45, 0.5], [0.8, 0.6], [1.0, 1.0]]


def zigzag_path():
    return PiecewiseLinearPath(ZIGZAG_TIMES, ZIGZAG_POINTS)
