"""Dense truncated tensor algebra over R^d.

Elements of T^N(R^d) = R + R^d + ... + (R^d)^(tensor N) are stored as one
flat coefficient array per level.  A level-k entry with 1-based letters
(i1, ..., ik) sits at flat offset sum_j (i_j - 1) * d**(k - j), i.e. plain
row-major order with the last letter fastest.

Values are immutable after construction (arrays are marked read-only) and
every operation is pure, so instances can be shared freely across threads.
"""

import numpy as np

__all__ = [
    "TruncatedTensor",
    "truncated_product",
    "level_norms",
    "segment_signature",
    "tensor_allclose",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class TruncatedTensor:
    """An element of T^depth(R^dim) with dense per-level coefficients."""

    __slots__ = ("dim", "depth", "_levels")

    def __init__(self, dim: int, depth: int, levels):
        dim = int(dim)
        depth = int(depth)
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        if depth < 0:
            raise ValueError(f"depth must be non-negative, got {depth}")
        if len(levels) != depth + 1:
            raise ValueError(f"expected {depth + 1} levels, got {len(levels)}")
        frozen = []
        for k, lvl in enumerate(levels):
            a = np.array(lvl, dtype=float, copy=True).reshape(-1)
            if a.size != dim**k:
                raise ValueError(
                    f"level {k} must hold {dim**k} entries, got {a.size}"
                )
            frozen.append(_frozen(a))
        self.dim = dim
        self.depth = depth
        self._levels = tuple(frozen)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, dim: int, depth: int) -> "TruncatedTensor":
        """Unit of the algebra: scalar 1, all higher levels zero."""
        levels = [np.zeros(dim**k) for k in range(depth + 1)]
        levels[0][0] = 1.0
        return cls(dim, depth, levels)

    @classmethod
    def zeros(cls, dim: int, depth: int) -> "TruncatedTensor":
        return cls(dim, depth, [np.zeros(dim**k) for k in range(depth + 1)])

    # -- accessors ----------------------------------------------------

    @property
    def levels(self) -> tuple:
        return self._levels

    def level(self, k: int) -> np.ndarray:
        """Read-only flat coefficient array of level k."""
        return self._levels[k]

    def resized(self, depth: int) -> "TruncatedTensor":
        """Truncate to, or zero-pad up to, the given depth."""
        if depth == self.depth:
            return self
        if depth < self.depth:
            return TruncatedTensor(self.dim, depth, self._levels[: depth + 1])
        pad = [np.zeros(self.dim**k) for k in range(self.depth + 1, depth + 1)]
        return TruncatedTensor(self.dim, depth, list(self._levels) + pad)

    # -- arithmetic (level-wise linear structure) ----------------------

    def _check_compatible(self, other: "TruncatedTensor"):
        if self.dim != other.dim or self.depth != other.depth:
            raise ValueError(
                f"incompatible tensors: (dim={self.dim}, depth={self.depth}) vs "
                f"(dim={other.dim}, depth={other.depth})"
            )

    def __add__(self, other):
        self._check_compatible(other)
        return TruncatedTensor(
            self.dim, self.depth,
            [a + b for a, b in zip(self._levels, other._levels)],
        )

    def __sub__(self, other):
        self._check_compatible(other)
        return TruncatedTensor(
            self.dim, self.depth,
            [a - b for a, b in zip(self._levels, other._levels)],
        )

    def __neg__(self):
        return TruncatedTensor(self.dim, self.depth, [-a for a in self._levels])

    def __mul__(self, scale):
        scale = float(scale)
        return TruncatedTensor(
            self.dim, self.depth, [scale * a for a in self._levels]
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.depth == other.depth
            and all(np.array_equal(a, b) for a, b in zip(self._levels, other._levels))
        )

    def __repr__(self):
        return f"TruncatedTensor(dim={self.dim}, depth={self.depth})"

    # -- serialization -------------------------------------------------

    def to_record(self) -> dict:
        """Structured text record: {dim, depth, levels as flat arrays}."""
        return {
            "dim": self.dim,
            "depth": self.depth,
            "levels": [lvl.tolist() for lvl in self._levels],
        }

    @classmethod
    def from_record(cls, record: dict) -> "TruncatedTensor":
        return cls(record["dim"], record["depth"], record["levels"])


def truncated_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Tensor-algebra product truncated at the common depth.

    Level n of the result is sum_{k=0..n} a_k tensor b_{n-k}; bilinear and
    associative up to truncation.  Rejects dimension or depth mismatch.
    """
    a._check_compatible(b)
    out = []
    for n in range(a.depth + 1):
        c = np.zeros(a.dim**n)
        for k in range(n + 1):
            c += np.outer(a.level(k), b.level(n - k)).ravel()
        out.append(c)
    return TruncatedTensor(a.dim, a.depth, out)


def level_norms(a: TruncatedTensor) -> np.ndarray:
    """Euclidean norm of each level, entry k for level k.

    This norm is submultiplicative level-wise (exactly multiplicative on
    outer products), which every product estimate downstream relies on.
    """
    return np.array([float(np.linalg.norm(lvl)) for lvl in a.levels])


def segment_signature(v, depth: int) -> TruncatedTensor:
    """Signature of a straight segment with increment v: level k is v^(tensor k)/k!."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    levels = [np.ones(1)]
    for k in range(1, depth + 1):
        levels.append(np.outer(levels[-1], v).ravel() / k)
    return TruncatedTensor(v.size, depth, levels)


def tensor_allclose(a: TruncatedTensor, b: TruncatedTensor, atol=1e-12, rtol=1e-12) -> bool:
    a._check_compatible(b)
    return all(
        np.allclose(x, y, atol=atol, rtol=rtol)
        for x, y in zip(a.levels, b.levels)
    )


# -- stacked kernels ----------------------------------------------------
# Internal batched versions of the operations above, used by the path and
# extension modules.  A "stack" is a list of (m, d**k) arrays, k = 0..depth,
# holding m tensors at once.


def stack_from_tensors(tensors) -> list:
    depth = tensors[0].depth
    return [
        np.stack([t.level(k) for t in tensors], axis=0) for k in range(depth + 1)
    ]


def stack_row(stack, i: int, dim: int) -> TruncatedTensor:
    return TruncatedTensor(dim, len(stack) - 1, [lvl[i] for lvl in stack])


def stack_segment_signatures(incs: np.ndarray, depth: int) -> list:
    """Batched segment signatures for an (m, d) array of increments."""
    m = incs.shape[0]
    levels = [np.ones((m, 1))]
    for k in range(1, depth + 1):
        nxt = (levels[-1][:, :, None] * incs[:, None, :]).reshape(m, -1) / k
        levels.append(nxt)
    return levels


def stack_product(a: list, b: list) -> list:
    """Row-wise truncated product of two stacks of equal shape."""
    depth = len(a) - 1
    m = a[0].shape[0]
    out = []
    for n in range(depth + 1):
        c = None
        for k in range(n + 1):
            term = (a[k][:, :, None] * b[n - k][:, None, :]).reshape(m, -1)
            c = term if c is None else c + term
        out.append(c)
    return out


def stack_reduce(stack: list) -> list:
    """Ordered product of all rows of a stack, pairwise for O(log m) rounds.

    Returns a stack with a single row.  Order is preserved: row i multiplies
    on the left of row i+1.
    """
    m = stack[0].shape[0]
    while m > 1:
        half = m // 2
        left = [lvl[0 : 2 * half : 2] for lvl in stack]
        right = [lvl[1 : 2 * half : 2] for lvl in stack]
        prod = stack_product(left, right)
        if m % 2:
            stack = [
                np.concatenate([p, lvl[-1:]], axis=0)
                for p, lvl in zip(prod, stack)
            ]
        else:
            stack = prod
        m = stack[0].shape[0]
    return stack
