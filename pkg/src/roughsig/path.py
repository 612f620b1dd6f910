"""Piecewise-linear paths on [0,1], their signatures over subintervals, and
arc-length controls calibrated to p-variation bounds.

Paths and controls are immutable; evaluation is pure and thread-safe.
"""

import csv
import io
import json
import math

import numpy as np
from scipy.special import gamma as _gamma

from .tensor import (
    TruncatedTensor,
    stack_reduce,
    stack_segment_signatures,
)

__all__ = [
    "PiecewiseLinearPath",
    "Control",
    "ControlledFunctional",
    "SignatureFunctional",
    "signature",
    "one_variation",
    "arc_length_control",
    "calibrated_control",
    "shared_calibrated_control",
    "sinusoid_perturbation",
]


class PiecewiseLinearPath:
    """Timestamps plus sample points in R^d, linearly interpolated.

    times must be strictly increasing with times[0] == 0 and times[-1] == 1;
    at least two samples are required.
    """

    __slots__ = ("times", "points", "_seg_len", "_cum_len")

    def __init__(self, times, points):
        times = np.array(times, dtype=float).reshape(-1)
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if times.size < 2:
            raise ValueError("a path needs at least 2 samples")
        if points.shape[0] != times.size:
            raise ValueError("times and points must have the same length")
        if not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if abs(times[0]) > 1e-12 or abs(times[-1] - 1.0) > 1e-12:
            raise ValueError("times must start at 0 and end at 1")
        times[0], times[-1] = 0.0, 1.0
        self._seg_len = np.linalg.norm(np.diff(points, axis=0), axis=1)
        self._cum_len = np.concatenate([[0.0], np.cumsum(self._seg_len)])
        times.flags.writeable = False
        points.flags.writeable = False
        self._cum_len.flags.writeable = False
        self._seg_len.flags.writeable = False
        self.times = times
        self.points = points

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_segments(self) -> int:
        return self.times.size - 1

    @property
    def length(self) -> float:
        return float(self._cum_len[-1])

    def _segment_index(self, t: np.ndarray) -> np.ndarray:
        return np.clip(
            np.searchsorted(self.times, t, side="right") - 1, 0, self.n_segments - 1
        )

    def position(self, t) -> np.ndarray:
        """Interpolated position; vectorized over an array of times."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = self._segment_index(t)
        t0 = self.times[idx]
        w = (t - t0) / (self.times[idx + 1] - t0)
        pos = self.points[idx] + w[:, None] * (self.points[idx + 1] - self.points[idx])
        return pos[0] if scalar else pos

    def arc_length_at(self, t) -> np.ndarray:
        """Cumulative arc length from time 0; vectorized."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = self._segment_index(t)
        t0 = self.times[idx]
        w = (t - t0) / (self.times[idx + 1] - t0)
        out = self._cum_len[idx] + w * self._seg_len[idx]
        return float(out[0]) if scalar else out

    # -- ingestion / serialization --------------------------------------

    @classmethod
    def from_csv(cls, source) -> "PiecewiseLinearPath":
        """Read a path from CSV with required header row time,x1,...,xd."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if not header or header[0].strip() != "time":
            raise ValueError("path CSV must start with a 'time,x1,...,xd' header row")
        rows = [[float(c) for c in row] for row in reader if row]
        data = np.asarray(rows, dtype=float)
        return cls(data[:, 0], data[:, 1:])

    def to_csv(self, dest) -> None:
        names = ",".join(f"x{i + 1}" for i in range(self.dim))
        lines = [f"time,{names}"]
        for t, p in zip(self.times, self.points):
            lines.append(",".join(repr(float(v)) for v in (t, *p)))
        text = "\n".join(lines) + "\n"
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)

    @classmethod
    def from_json(cls, source) -> "PiecewiseLinearPath":
        """Read a path from a JSON document {"times": [...], "points": [[...], ...]}."""
        if isinstance(source, dict):
            doc = source
        elif hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        return cls(doc["times"], doc["points"])

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "times": self.times.tolist(),
            "points": self.points.tolist(),
        }

    def __repr__(self):
        return (
            f"PiecewiseLinearPath(dim={self.dim}, segments={self.n_segments}, "
            f"length={self.length:.6g})"
        )


def _cut_points(path: PiecewiseLinearPath, s: float, t: float) -> np.ndarray:
    """s, interior sample times strictly inside (s, t), then t."""
    i0 = np.searchsorted(path.times, s, side="right")
    i1 = np.searchsorted(path.times, t, side="left")
    return np.concatenate([[s], path.times[i0:i1], [t]])


def signature(path: PiecewiseLinearPath, s: float, t: float, depth: int) -> TruncatedTensor:
    """Signature of the path restricted to [s, t], truncated at the given depth.

    Chen concatenation of per-segment closed forms; subintervals that cut a
    segment interior use the linear interpolant's partial increment, so the
    result is exact for piecewise-linear paths.  s == t yields the identity.
    """
    if s > t:
        raise ValueError(f"require s <= t, got s={s}, t={t}")
    if s < 0.0 or t > 1.0:
        raise ValueError(f"[s, t] must lie inside [0, 1], got [{s}, {t}]")
    if s == t:
        return TruncatedTensor.identity(path.dim, depth)
    cuts = _cut_points(path, s, t)
    incs = np.diff(path.position(cuts), axis=0)
    stack = stack_segment_signatures(incs, depth)
    reduced = stack_reduce(stack)
    return TruncatedTensor(path.dim, depth, [lvl[0] for lvl in reduced])


def one_variation(path: PiecewiseLinearPath, s: float, t: float) -> float:
    """Euclidean arc length of the path on [s, t]; additive over concatenation."""
    if s > t:
        raise ValueError(f"require s <= t, got s={s}, t={t}")
    return float(path.arc_length_at(t) - path.arc_length_at(s))


class Control:
    """A superadditive function omega(s, t) >= 0 vanishing on the diagonal.

    The evaluator must accept numpy arrays elementwise (this is what makes
    vectorized balance-point bisection possible downstream).
    """

    __slots__ = ("evaluator", "description")

    def __init__(self, evaluator, description: str = ""):
        self.evaluator = evaluator
        self.description = description

    def __call__(self, s, t):
        return self.evaluator(s, t)

    def __repr__(self):
        return f"Control({self.description!r})"


def arc_length_control(path: PiecewiseLinearPath, scale: float = 1.0) -> Control:
    """scale * (arc length on [s, t]): exactly additive, hence superadditive."""
    scale = float(scale)

    def evaluator(s, t):
        return scale * (path.arc_length_at(t) - path.arc_length_at(s))

    return Control(evaluator, f"{scale:.12g}*arclen")


def _sample_pairs(rng: np.random.Generator, count: int, min_gap: float = 1e-3) -> np.ndarray:
    """Seeded (s, t) pairs with s < t, including the full interval."""
    raw = rng.random((4 * count, 2))
    s = np.minimum(raw[:, 0], raw[:, 1])
    t = np.maximum(raw[:, 0], raw[:, 1])
    keep = (t - s) >= min_gap
    pairs = np.column_stack([s[keep], t[keep]])[: count - 1]
    return np.vstack([[0.0, 1.0], pairs])


def _frac_factorial(x) -> np.ndarray:
    # Gamma(x + 1); the bounds module re-exports the public version.
    return _gamma(np.asarray(x, dtype=float) + 1.0)


def _calibrate_scale(paths, p: float, beta: float, depth: int,
                     pairs: np.ndarray, safety: float) -> float:
    """Smallest scale lam (by bisection) such that omega = lam * combined arc
    length satisfies ||X^n|| <= omega^(n/p) / (beta * (n/p)!) on every sampled
    pair and level for every path, inflated by the safety factor."""
    fact = _frac_factorial(np.arange(depth + 1) / p)
    records = []  # (norm, level, length) with norm > 0
    lengths = np.zeros(len(pairs))
    for path in paths:
        lengths += np.array([one_variation(path, s, t) for s, t in pairs])
    for path in paths:
        for (s, t), L in zip(pairs, lengths):
            sig = signature(path, s, t, depth)
            for n in range(1, depth + 1):
                nrm = float(np.linalg.norm(sig.level(n)))
                if nrm > 0.0:
                    records.append((nrm, n, L))

    def admissible(lam: float) -> bool:
        for nrm, n, L in records:
            if (lam * L) ** (n / p) < beta * fact[n] * nrm * (1.0 - 1e-14):
                return False
        return True

    # For p = 1 the closed form lam = beta is admissible and caps the search.
    hi = max(beta, 1.0)
    for _ in range(200):
        if admissible(hi):
            break
        hi *= 2.0
    else:
        raise RuntimeError("calibration failed to bracket an admissible scale")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    return hi * safety


def calibrated_control(path: PiecewiseLinearPath, p: float, beta: float,
                       depth: int | None = None, sample_pairs: int = 200,
                       seed: int = 2024, safety: float = 1.01) -> Control:
    """Scaled arc-length control making the p-variation bound hold.

    Returns omega(s, t) = lam * length(s, t) with lam found by bisection over
    sampled (s, t) pairs and levels 1..floor(p), then inflated by `safety`.

    Raises if the path pauses (zero-length segment): the resulting control
    would not be strictly increasing in t, which the balance-point machinery
    requires.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if np.any(path._seg_len == 0.0):
        i = int(np.argmin(path._seg_len))
        raise ValueError(
            f"path pauses on segment {i} (zero length); control would not be "
            "strictly increasing"
        )
    if depth is None:
        depth = int(math.floor(p))
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(rng, sample_pairs)
    lam = _calibrate_scale([path], p, beta, depth, pairs, safety)
    return arc_length_control(path, lam)


def shared_calibrated_control(path_a: PiecewiseLinearPath, path_b: PiecewiseLinearPath,
                              p: float, beta: float, depth: int | None = None,
                              sample_pairs: int = 200, seed: int = 2024,
                              safety: float = 1.01) -> Control:
    """One control dominating both paths: lam * (length_a + length_b).

    The sum of arc lengths is again additive; lam is calibrated so both
    paths' p-variation bounds hold on the sampled pairs.
    """
    for path in (path_a, path_b):
        if np.any(path._seg_len == 0.0):
            raise ValueError("paths must not pause (zero-length segment)")
    if depth is None:
        depth = int(math.floor(p))
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(rng, sample_pairs)
    lam = _calibrate_scale([path_a, path_b], p, beta, depth, pairs, safety)

    def evaluator(s, t):
        return lam * (
            (path_a.arc_length_at(t) - path_a.arc_length_at(s))
            + (path_b.arc_length_at(t) - path_b.arc_length_at(s))
        )

    return Control(evaluator, f"{lam:.12g}*(arclen_a+arclen_b)")


class ControlledFunctional:
    """A multiplicative functional (s, t) -> TruncatedTensor with finite
    p-variation controlled by `control` with constant `beta`.

    `depth` is the level up to which the functional carries data; None means
    any requested depth can be evaluated exactly.
    """

    def __init__(self, p: float, beta: float, control: Control, depth: int | None):
        if p < 1:
            raise ValueError("p must be at least 1")
        self.p = float(p)
        self.beta = float(beta)
        self.control = control
        self.depth = depth

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def evaluate(self, s: float, t: float, depth: int) -> TruncatedTensor:
        raise NotImplementedError

    def evaluate_batch(self, starts, ends, depth: int) -> list:
        """Stacked levels for many (s, t) pairs; default is a plain loop."""
        tensors = [self.evaluate(s, t, depth) for s, t in zip(starts, ends)]
        return [
            np.stack([x.level(k) for x in tensors], axis=0)
            for k in range(depth + 1)
        ]

    def native_extension_provider(self) -> "ControlledFunctional | None":
        """A functional evaluating this data's unique multiplicative extension
        in closed form, if one is available; None otherwise."""
        return None

    def chen_defect(self, s: float, u: float, t: float, depth: int) -> float:
        """Max coefficient error of X(s,u) x X(u,t) against X(s,t)."""
        from .tensor import truncated_product

        lhs = truncated_product(self.evaluate(s, u, depth), self.evaluate(u, t, depth))
        rhs = self.evaluate(s, t, depth)
        return max(
            float(np.max(np.abs(a - b))) for a, b in zip(lhs.levels, rhs.levels)
        )

    def p_variation_margin(self, s: float, t: float, depth: int | None = None) -> float:
        """Min over levels 1..floor(p) of bound - ||X^n||; >= 0 when controlled."""
        top = int(math.floor(self.p)) if depth is None else depth
        x = self.evaluate(s, t, top)
        w = float(self.control(s, t))
        worst = math.inf
        for n in range(1, top + 1):
            bound = w ** (n / self.p) / (self.beta * float(_frac_factorial(n / self.p)))
            worst = min(worst, bound - float(np.linalg.norm(x.level(n))))
        return worst


class SignatureFunctional(ControlledFunctional):
    """The signature of a bounded-variation path, viewed as a multiplicative
    functional at nominal roughness p.

    With depth=None all levels are evaluable in closed form (and coincide
    with the unique multiplicative extension of the low-level data); with an
    integer depth the functional refuses deeper evaluation, modelling data
    that only carries levels 1..depth.
    """

    def __init__(self, path: PiecewiseLinearPath, p: float, beta: float,
                 control: Control, depth: int | None = None):
        super().__init__(p, beta, control, depth)
        self.path = path

    @property
    def dim(self) -> int:
        return self.path.dim

    def with_depth(self, depth: int | None) -> "SignatureFunctional":
        return SignatureFunctional(self.path, self.p, self.beta, self.control, depth)

    def native_extension_provider(self) -> "SignatureFunctional":
        """The closed-form signature at any depth: exactly the unique
        multiplicative extension of this functional's low-level data."""
        return self if self.depth is None else self.with_depth(None)

    def _check_depth(self, depth: int):
        if self.depth is not None and depth > self.depth:
            raise ValueError(
                f"functional carries data only up to level {self.depth}, "
                f"requested {depth}"
            )

    def evaluate(self, s: float, t: float, depth: int) -> TruncatedTensor:
        self._check_depth(depth)
        return signature(self.path, s, t, depth)

    def evaluate_batch(self, starts, ends, depth: int) -> list:
        """Vectorized signatures over many intervals.

        Intervals with no interior path node reduce to one batched segment
        exponential; the few that straddle nodes are reduced individually.
        """
        self._check_depth(depth)
        starts = np.asarray(starts, dtype=float)
        ends = np.asarray(ends, dtype=float)
        m = starts.size
        d = self.dim
        path = self.path

        i0 = np.searchsorted(path.times, starts, side="right")
        i1 = np.searchsorted(path.times, ends, side="left")
        simple = i0 >= i1  # no interior sample point

        pos_s = path.position(starts)
        pos_t = path.position(ends)
        levels = stack_segment_signatures(pos_t - pos_s, depth)

        for i in np.nonzero(~simple)[0]:
            cuts = np.concatenate([[starts[i]], path.times[i0[i]:i1[i]], [ends[i]]])
            incs = np.diff(path.position(cuts), axis=0)
            red = stack_reduce(stack_segment_signatures(incs, depth))
            for k in range(depth + 1):
                levels[k][i] = red[k][0]
        return levels


def sinusoid_perturbation(path: PiecewiseLinearPath, amplitude: float,
                          cycles: int = 3, direction=None,
                          nodes_per_cycle: int = 32) -> PiecewiseLinearPath:
    """path + amplitude * sin(2 pi cycles t) * unit_direction, sampled on the
    union of the path's own nodes and a uniform grid containing the sinusoid
    peaks (so the sup distance equals `amplitude` exactly)."""
    d = path.dim
    if direction is None:
        direction = np.zeros(d)
        direction[0] = 1.0
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    grid = np.linspace(0.0, 1.0, cycles * nodes_per_cycle + 1)
    times = np.union1d(path.times, grid)
    wave = amplitude * np.sin(2.0 * math.pi * cycles * times)
    points = path.position(times) + wave[:, None] * direction[None, :]
    return PiecewiseLinearPath(times, points)
