"""Multiplicative extension of a controlled functional to higher tensor levels.

A level-n functional X is lifted to level n+1 as the limit, over refining
control-balanced dyadic partitions, of products of hat factors: X evaluated
to depth n with a zero level n+1 appended, multiplied out in T^(n+1).
Levels <= n of any such product are partition-independent (Chen identity);
the top level converges geometrically, with per-refinement increments bounded
by (1/2^K)^((n+1)/p - 1) * 2 p omega(s,t)^((n+1)/p) / (beta^2 ((n+1)/p)!).

Because the increments are geometric, the limit is realized numerically by
summing the computed increments and adding the extrapolated geometric tail
(ratio fitted from the last two increments).  The stopping rule requires the
extrapolated value to move by less than the configured tolerance on two
consecutive refinements, and never stops before order 2.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .partition import DEFAULT_TOL, refine_once
from .path import Control, ControlledFunctional
from .tensor import TruncatedTensor, stack_reduce, truncated_product

__all__ = [
    "ExtensionConfig",
    "ExtensionError",
    "ExtensionLog",
    "hat_partition_product",
    "drop_point_defect",
    "lyons_extend",
    "lyons_extend_verbose",
    "extend_one_level",
    "ExtendedFunctional",
    "difference_hat_top_norms",
    "extension_beta_floor",
]


class ExtensionError(RuntimeError):
    """Raised when the dyadic limit fails to converge within max_order."""

    def __init__(self, message: str, last_increment: float):
        super().__init__(message)
        self.last_increment = last_increment


@dataclass(frozen=True)
class ExtensionConfig:
    """Knobs for the dyadic-limit computation.

    convergence_tol: stop once the (extrapolated) top level moves less than
        this between successive orders, twice in a row.
    max_order: hard cap on the partition order K.
    target_depth: level up to which the functional is extended.
    min_order: never declare convergence before this order.
    accelerate: add the fitted geometric tail to the partial products.
    partition_tol: relative balance tolerance passed to the bisection.
    """

    convergence_tol: float = 1e-9
    max_order: int = 18
    target_depth: int = 2
    min_order: int = 2
    accelerate: bool = True
    partition_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_order < 1:
            raise ValueError("max_order must be at least 1")


@dataclass
class ExtensionLog:
    """Per-level record of one extension run."""

    orders: list = field(default_factory=list)
    increment_norms: list = field(default_factory=list)
    extrapolated_deltas: list = field(default_factory=list)
    stop_order: int = -1


def extension_beta_floor(p: float) -> float:
    """Smallest beta for which the extension theorem guarantees the lift:
    p / (1 - (1/2)^((floor(p)+1)/p - 1))."""
    expo = (math.floor(p) + 1.0) / p - 1.0
    return p / (1.0 - 0.5**expo)


def _as_points(partition) -> np.ndarray:
    return np.asarray(getattr(partition, "points", partition), dtype=float)


def hat_partition_product(X: ControlledFunctional, partition, depth_in: int) -> TruncatedTensor:
    """Product over the partition of hat factors in T^(depth_in + 1).

    Each factor is X evaluated to depth_in with a zero top level appended.
    Levels <= depth_in of the result equal X(s, t) by multiplicativity.
    """
    pts = _as_points(partition)
    acc = TruncatedTensor.identity(X.dim, depth_in + 1)
    for u, v in zip(pts[:-1], pts[1:]):
        factor = X.evaluate(u, v, depth_in).resized(depth_in + 1)
        acc = truncated_product(acc, factor)
    return acc


def drop_point_defect(X: ControlledFunctional, u_prev: float, u: float,
                      u_next: float, depth_in: int) -> np.ndarray:
    """Change of the top level when u is removed from a partition:
    sum_{k=1..n} X^k(u_prev, u) tensor X^{n+1-k}(u, u_next), n = depth_in.

    Returned as the flat level-(n+1) coefficient slice.
    """
    if not u_prev <= u <= u_next:
        raise ValueError("require u_prev <= u <= u_next")
    n = depth_in
    d = X.dim
    out = np.zeros(d ** (n + 1))
    if u == u_prev or u == u_next:
        return out  # an empty factor is the identity: every term vanishes
    left = X.evaluate(u_prev, u, n)
    right = X.evaluate(u, u_next, n)
    for k in range(1, n + 1):
        out += np.outer(left.level(k), right.level(n + 1 - k)).ravel()
    return out


def _hat_stack(provider: ControlledFunctional, pts: np.ndarray, n: int) -> list:
    """Stacked hat factors (levels 0..n from the provider, zero level n+1)."""
    levels = provider.evaluate_batch(pts[:-1], pts[1:], n)
    m = levels[0].shape[0]
    levels.append(np.zeros((m, provider.dim ** (n + 1))))
    return levels


def _sweep_top_level(provider: ControlledFunctional, control: Control,
                     s: float, t: float, top_depth: int,
                     config: ExtensionConfig):
    """Dyadic K-sweep of hat products in T^top_depth on (s, t).

    Returns (final TruncatedTensor with the limiting top level, ExtensionLog).
    """
    n = top_depth - 1
    log = ExtensionLog()
    pts = np.array([s, t], dtype=float)
    top_prev = None
    inc_prev = None
    extrap_prev = None
    lower_levels = None
    streak = 0
    scale = None

    for K in range(config.max_order + 1):
        stack = _hat_stack(provider, pts, n)
        reduced = stack_reduce(stack)
        top = reduced[top_depth][0]
        lower_levels = [lvl[0] for lvl in reduced[:top_depth]]
        log.orders.append(K)

        if top_prev is not None:
            inc = top - top_prev
            inc_norm = float(np.linalg.norm(inc))
            log.increment_norms.append(inc_norm)
            if scale is None:
                scale = max(1.0, float(np.linalg.norm(top)))

            extrap = top
            if config.accelerate and inc_prev is not None:
                denom = float(inc_prev @ inc_prev)
                ratio = float(inc @ inc_prev) / denom if denom > 0 else 0.0
                if 0.0 < ratio <= 0.95:
                    extrap = top + inc * (ratio / (1.0 - ratio))

            if extrap_prev is not None:
                delta = float(np.linalg.norm(extrap - extrap_prev))
                log.extrapolated_deltas.append(delta)
                noise_floor = 1e3 * np.finfo(float).eps * scale
                if delta < max(config.convergence_tol, noise_floor):
                    streak += 1
                else:
                    streak = 0
                if streak >= 2 and K >= config.min_order:
                    log.stop_order = K
                    levels = lower_levels + [extrap]
                    return TruncatedTensor(provider.dim, top_depth, levels), log
            extrap_prev = extrap
            inc_prev = inc
        top_prev = top

        if K < config.max_order:
            pts = refine_once(control, pts, config.partition_tol)

    last = log.increment_norms[-1] if log.increment_norms else math.inf
    raise ExtensionError(
        f"dyadic limit for level {top_depth} on [{s}, {t}] did not converge "
        f"within order {config.max_order}; last increment {last:.3e}",
        last_increment=last,
    )


def _start_depth(X: ControlledFunctional) -> int:
    if X.depth is not None:
        return int(X.depth)
    return max(1, int(math.floor(X.p)))


def _check_admissible(X: ControlledFunctional):
    floor_beta = extension_beta_floor(X.p)
    if X.beta < floor_beta:
        warnings.warn(
            f"beta={X.beta:.6g} is below the extension threshold "
            f"{floor_beta:.6g} for p={X.p}; the numerical limit may still "
            "converge but is not guaranteed",
            stacklevel=3,
        )


def lyons_extend(X: ControlledFunctional, s: float, t: float,
                 config: ExtensionConfig) -> TruncatedTensor:
    """Extend X on (s, t) to config.target_depth via dyadic limits.

    Levels above the functional's data depth are produced one at a time:
    level m is the limit of hat products whose factors carry levels < m.
    Factors are sourced from X itself when it can evaluate that deep (a
    path-backed functional evaluates its unique extension in closed form);
    otherwise from the previously extended functional, in which case inner
    limits make the computation much more expensive.
    """
    tensor, _ = lyons_extend_verbose(X, s, t, config)
    return tensor


def lyons_extend_verbose(X: ControlledFunctional, s: float, t: float,
                         config: ExtensionConfig):
    """As lyons_extend, returning (tensor, {level: ExtensionLog})."""
    if s > t:
        raise ValueError("require s <= t")
    start = _start_depth(X)
    if start < math.floor(X.p):
        raise ValueError(
            f"functional must carry at least floor(p)={math.floor(X.p):.0f} levels"
        )
    _check_admissible(X)
    target = config.target_depth
    if target <= start:
        return X.evaluate(s, t, target), {}

    logs = {}
    levels = list(X.evaluate(s, t, start).levels)
    provider = X
    for m in range(start + 1, target + 1):
        provider = _provider_for(X, provider, m - 1, config)
        lifted, log = _sweep_top_level(provider, X.control, s, t, m, config)
        logs[m] = log
        levels.append(lifted.level(m))
    return TruncatedTensor(X.dim, target, levels), logs


def _provider_for(X: ControlledFunctional, current: ControlledFunctional,
                  need_depth: int, config: ExtensionConfig) -> ControlledFunctional:
    """The functional supplying factor levels 0..need_depth.

    Preference order: X itself when it can evaluate that deep; X's native
    closed form when it has one (for path-backed data the closed form *is*
    the unique extension of the low-level data, so sourcing factor levels
    from it is exact and cheap); otherwise the previously extended
    functional, whose memoized inner limits make the sweep far costlier.
    """
    if X.depth is None or X.depth >= need_depth:
        return X
    native = X.native_extension_provider()
    if native is not None:
        return native
    if getattr(current, "depth", None) is not None and current.depth >= need_depth:
        return current
    return ExtendedFunctional(current, config)


def extend_one_level(X: ControlledFunctional, config: ExtensionConfig) -> "ExtendedFunctional":
    """Functional view of the one-level lift; evaluation is lazy and memoized."""
    return ExtendedFunctional(X, config)


class ExtendedFunctional(ControlledFunctional):
    """X extended by one level; the top level is a memoized dyadic limit.

    Controlled by the same control and beta as the base functional.  The
    memo is only mutated by insertion, so concurrent readers are safe.
    """

    def __init__(self, base: ControlledFunctional, config: ExtensionConfig):
        base_depth = _start_depth(base)
        super().__init__(base.p, base.beta, base.control, base_depth + 1)
        self.base = base
        self.config = config
        self._memo: dict = {}

    @property
    def dim(self) -> int:
        return self.base.dim

    def evaluate(self, s: float, t: float, depth: int) -> TruncatedTensor:
        if depth < self.depth:
            return self.base.evaluate(s, t, depth)
        if depth > self.depth:
            raise ValueError(
                f"extended functional carries levels up to {self.depth}, "
                f"requested {depth}"
            )
        if s == t:
            return TruncatedTensor.identity(self.dim, depth)
        key = (float(s), float(t))
        top = self._memo.get(key)
        if top is None:
            lifted, _ = _sweep_top_level(
                self.base, self.control, s, t, self.depth, self.config
            )
            top = lifted
            self._memo[key] = top
        return top


def difference_hat_top_norms(X: ControlledFunctional, Y: ControlledFunctional,
                             control: Control, s: float, t: float,
                             depth_in: int, max_order: int,
                             partition_tol: float = DEFAULT_TOL) -> np.ndarray:
    """|| (hat-X^{P_K} - hat-Y^{P_K})^(n+1) || for K = 0..max_order, with both
    hat products taken over the same control-balanced partitions."""
    pts = np.array([s, t], dtype=float)
    norms = np.empty(max_order + 1)
    top = depth_in + 1
    for K in range(max_order + 1):
        x_top = stack_reduce(_hat_stack(X, pts, depth_in))[top][0]
        y_top = stack_reduce(_hat_stack(Y, pts, depth_in))[top][0]
        norms[K] = float(np.linalg.norm(x_top - y_top))
        if K < max_order:
            pts = refine_once(control, pts, partition_tol)
    return norms
