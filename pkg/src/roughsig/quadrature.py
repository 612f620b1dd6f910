"""Grid quadrature for iterated integrals, independent of the Chen-product
signature algorithm.

Levels are built recursively as cumulative trapezoid-tag Riemann sums:
F_k(t_j) = sum_{i<=j} (F_{k-1}(t_{i-1}) + F_{k-1}(t_i))/2 tensor inc_i.
Used as a cross-check oracle for `signature` and by the CLI's self-audit.
"""

import numpy as np

from .path import PiecewiseLinearPath

__all__ = ["iterated_riemann_levels"]


def iterated_riemann_levels(path: PiecewiseLinearPath, depth: int, grid_n: int,
                            s: float = 0.0, t: float = 1.0) -> list:
    """Iterated Riemann sums of the path over [s, t] on a uniform grid of
    grid_n cells; returns one flat coefficient array per level 0..depth."""
    if grid_n < 1:
        raise ValueError("grid_n must be positive")
    ts = np.linspace(s, t, grid_n + 1)
    pos = path.position(ts)
    incs = np.diff(pos, axis=0)
    levels = [np.ones(1)]
    F = np.ones((grid_n + 1, 1))
    for k in range(1, depth + 1):
        avg = 0.5 * (F[:-1] + F[1:])
        g = (avg[:, :, None] * incs[:, None, :]).reshape(grid_n, -1)
        Fk = np.vstack([np.zeros((1, g.shape[1])), np.cumsum(g, axis=0)])
        levels.append(Fk[-1].copy())
        F = Fk
    return levels
