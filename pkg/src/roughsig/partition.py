"""Control-balanced dyadic partitions.

A K-order partition of [s, t] splits it into 2^K subintervals such that each
refinement level balances the control: omega(u_{j-1}, u_j) = omega(u_j, u_{j+1})
at every odd index, for every stride-2^m coarsening.  Construction is by
recursive balance-point insertion; each balance point is found by bisection
on f(u) = omega(s, u) - omega(u, t), which only needs the control to be
continuous and monotone.
"""

from dataclasses import dataclass

import numpy as np

from .path import Control

__all__ = [
    "DyadicPartition",
    "NonMonotoneControlError",
    "balance_point",
    "total_dyadic_partition",
    "balance_residuals",
    "max_subinterval_control",
]

DEFAULT_TOL = 1e-12
_MAX_BISECT = 200


class NonMonotoneControlError(ValueError):
    """The control failed to produce a balance point on an interval."""


@dataclass(frozen=True)
class DyadicPartition:
    """2^order + 1 strictly increasing times with balanced control values."""

    points: np.ndarray
    order: int
    control_tag: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size != 2**self.order + 1:
            raise ValueError(
                f"order-{self.order} partition needs {2**self.order + 1} points, "
                f"got {pts.size}"
            )
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise ValueError("partition points must be strictly increasing")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def s(self) -> float:
        return float(self.points[0])

    @property
    def t(self) -> float:
        return float(self.points[-1])

    def subpartition(self, coarsen_by: int) -> "DyadicPartition":
        """The stride-2^m coarsening, itself an (order - m)-dyadic partition."""
        if not 0 <= coarsen_by <= self.order:
            raise ValueError("coarsen_by must lie in [0, order]")
        return DyadicPartition(
            self.points[:: 2**coarsen_by], self.order - coarsen_by, self.control_tag
        )

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "order": self.order,
            "control": self.control_tag,
            "points": self.points.tolist(),
        }


def _bisect_balance(omega, ss: np.ndarray, tt: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized bisection for the balance points of many intervals at once."""
    ss = np.asarray(ss, dtype=float)
    tt = np.asarray(tt, dtype=float)
    total = np.asarray(omega(ss, tt), dtype=float)
    if np.any(total < 0):
        i = int(np.argmin(total))
        raise NonMonotoneControlError(
            f"control is negative on [{ss[i]}, {tt[i]}]: omega={total[i]}"
        )
    lo = ss.copy()
    hi = tt.copy()
    # Degenerate intervals (omega == 0): any point balances; take the midpoint.
    degenerate = total == 0.0
    thresh = tol * np.where(degenerate, 1.0, total)
    eps = np.finfo(float).eps
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        f = np.asarray(omega(ss, mid)) - np.asarray(omega(mid, tt))
        collapsed = (hi - lo) <= 4.0 * eps * np.maximum(np.abs(hi), 1.0)
        done = (np.abs(f) <= thresh) | degenerate | collapsed
        if np.all(done):
            break
        lo = np.where((f < 0) & ~done, mid, lo)
        hi = np.where((f > 0) & ~done, mid, hi)
        mid = np.where(done, mid, 0.5 * (lo + hi))
    f = np.asarray(omega(ss, mid)) - np.asarray(omega(mid, tt))
    # A collapsed bracket with a residual that is tiny relative to the
    # interval's control is float-limited convergence, not non-monotonicity.
    bad = ~degenerate & (np.abs(f) > thresh) & (np.abs(f) > 1e-6 * total)
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise NonMonotoneControlError(
            f"no balance point on [{ss[i]}, {tt[i]}]: residual {f[i]:.3e} exceeds "
            f"tolerance {thresh[i]:.3e}; control may not be strictly monotone"
        )
    return mid


def balance_point(omega: Control, s: float, t: float, tol: float = DEFAULT_TOL) -> float:
    """The unique u in (s, t) with omega(s, u) = omega(u, t), up to tol*omega(s, t).

    Requires omega strictly increasing in t and decreasing in s on the
    interval; a control violating this raises NonMonotoneControlError naming
    the interval.
    """
    if not s < t:
        raise ValueError(f"require s < t, got s={s}, t={t}")
    return float(_bisect_balance(omega, np.array([s]), np.array([t]), tol)[0])


def total_dyadic_partition(omega: Control, s: float, t: float, K: int,
                           tol: float = DEFAULT_TOL) -> DyadicPartition:
    """The unique total K-dyadic partition of [s, t] with respect to omega.

    Built by recursive midpoint insertion: level k+1 inserts one balance
    point between every pair of consecutive points of level k.  As a
    consequence every subinterval satisfies
    omega(u_{j-1}, u_j) <= omega(s, t) / 2^K (up to tolerance).
    """
    if K < 0:
        raise ValueError("K must be non-negative")
    if not s < t:
        raise ValueError(f"require s < t, got s={s}, t={t}")
    points = np.array([s, t], dtype=float)
    for _ in range(K):
        points = refine_once(omega, points, tol)
    tag = getattr(omega, "description", "") or ""
    return DyadicPartition(points, K, tag)


def refine_once(omega, points: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Insert one balance point in every consecutive gap (vectorized)."""
    mids = _bisect_balance(omega, points[:-1], points[1:], tol)
    out = np.empty(2 * points.size - 1)
    out[0::2] = points
    out[1::2] = mids
    return out


def balance_residuals(partition: DyadicPartition, omega: Control) -> np.ndarray:
    """Balance defects |omega(left) - omega(right)| / omega(s, t) across every
    coarsening level; used to audit a constructed partition."""
    total = float(omega(partition.s, partition.t))
    if total == 0.0:
        total = 1.0
    residuals = []
    for m in range(partition.order):
        pts = partition.points[:: 2**m]
        left = np.asarray(omega(pts[:-2:2], pts[1:-1:2]))
        right = np.asarray(omega(pts[1:-1:2], pts[2::2]))
        residuals.extend(np.abs(left - right) / total)
    return np.asarray(residuals)


def max_subinterval_control(partition: DyadicPartition, omega: Control) -> float:
    """max_j omega(u_{j-1}, u_j); the halving property bounds this by
    omega(s, t) / 2^order up to tolerance."""
    pts = partition.points
    return float(np.max(np.asarray(omega(pts[:-1], pts[1:]))))
