"""Contour functions on the circle: uniform Dyck excursions and arc-minimum queries.

A discrete excursion is a +-1 walk of length 2n from 0 to 0 staying nonnegative,
read as a function on a circle of 2n time steps (time 2n is glued back to time 0,
so ``heights`` has 2n+1 entries with equal first and last value).  Everything
downstream is driven by arc minima: the pseudo-distance

    d(a, b) = heights[a] + heights[b] - 2 * max_arc_min(a, b)

vanishes exactly when a and b code the same point of the tree obtained by gluing
the circle along equal-height arcs.  Rescaled by sqrt(2n), the heights of a
uniform Dyck excursion approximate the normalized Brownian excursion, which is
why large-n statistics of these objects track continuum values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiscreteExcursion",
    "RmqIndex",
    "LocalMinimaReport",
    "sample_dyck_excursion",
    "build_rmq",
    "arc_min",
    "max_arc_min",
    "tree_pseudo_distance",
    "local_minima_report",
    "excursion_to_json",
    "excursion_from_json",
]

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class DiscreteExcursion:
    """Dyck path of half-length n with its height profile.

    ``steps`` has 2n entries in {+1, -1}; ``heights`` has 2n+1 entries with
    heights[0] == heights[2n] == 0 and unit increments.  Index arithmetic on
    the circle is modulo 2n.
    """

    n: int
    steps: np.ndarray
    heights: np.ndarray
    seed: int

    @classmethod
    def from_steps(cls, steps, seed: int = 0) -> "DiscreteExcursion":
        steps = np.asarray(steps, dtype=np.int64)
        if steps.ndim != 1 or steps.size == 0 or steps.size % 2 != 0:
            raise ValueError("steps must be a nonempty sequence of even length")
        if not np.all(np.abs(steps) == 1):
            raise ValueError("steps must consist of +1 and -1 only")
        heights = np.zeros(steps.size + 1, dtype=np.int64)
        np.cumsum(steps, out=heights[1:])
        if heights[-1] != 0:
            raise ValueError("steps are not balanced")
        if heights.min() < 0:
            raise ValueError("walk dips below zero; not an excursion")
        return cls(n=steps.size // 2, steps=steps, heights=heights, seed=int(seed))

    @property
    def length(self) -> int:
        """Number of circle positions, 2n."""
        return 2 * self.n


def sample_dyck_excursion(n: int, seed: int) -> DiscreteExcursion:
    """Draw a uniform Dyck path of length 2n, deterministically from ``seed``.

    Shuffles a multiset of n up-steps and n+1 down-steps and applies the unique
    cyclic rotation whose proper prefix sums are all nonnegative (the rotation
    starting just after the first minimum of the prefix walk).  The final step
    of the rotated word is forced to be a down-step and is dropped.  Every Dyck
    path arises from exactly 2n+1 arrangements, so the output is exactly
    uniform, in O(n) time.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    walk = np.full(2 * n + 1, -1, dtype=np.int64)
    walk[:n] = 1
    rng.shuffle(walk)
    prefix = np.cumsum(walk)
    cut = int(np.argmin(prefix)) + 1
    rotated = np.concatenate([walk[cut:], walk[:cut]])
    return DiscreteExcursion.from_steps(rotated[:-1], seed=seed)


class RmqIndex:
    """Sparse-table minimum index over an integer array; O(1) range queries.

    Space is O(N log N) entries.  ``range_min`` accepts scalars or arrays of
    inclusive index bounds, which keeps the hot loops of the tree and map
    modules vectorized.
    """

    def __init__(self, values):
        v = np.asarray(values, dtype=np.int64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        n = v.size
        levels = max(1, int(n).bit_length())
        table = np.full((levels, n), np.iinfo(np.int64).max, dtype=np.int64)
        table[0] = v
        for k in range(1, levels):
            half = 1 << (k - 1)
            span = n - (1 << k) + 1
            if span <= 0:
                break
            np.minimum(table[k - 1, :span], table[k - 1, half : half + span], out=table[k, :span])
        log = np.zeros(n + 1, dtype=np.int64)
        for i in range(2, n + 1):
            log[i] = log[i >> 1] + 1
        self._table = table
        self._log = log
        self._n = n

    @property
    def size(self) -> int:
        """Number of table entries held in memory."""
        return int(self._table.size)

    def range_min(self, lo, hi):
        """Exact minimum of the indexed values over the inclusive range [lo, hi]."""
        lo_a = np.asarray(lo, dtype=np.int64)
        hi_a = np.asarray(hi, dtype=np.int64)
        if np.any(lo_a < 0) or np.any(hi_a >= self._n) or np.any(lo_a > hi_a):
            raise ValueError("range out of bounds")
        k = self._log[hi_a - lo_a + 1]
        out = np.minimum(self._table[k, lo_a], self._table[k, hi_a - (1 << k) + 1])
        if np.isscalar(lo) and np.isscalar(hi):
            return int(out)
        return out


def build_rmq(e: DiscreteExcursion) -> RmqIndex:
    return RmqIndex(e.heights)


def _check_times(e: DiscreteExcursion, *times) -> None:
    top = 2 * e.n
    for t in times:
        t = np.asarray(t)
        if np.any(t < 0) or np.any(t > top):
            raise ValueError(f"time index out of range [0, {top}]")


def arc_min(e: DiscreteExcursion, idx: RmqIndex, a, b):
    """Minimum of the heights over the counterclockwise closed arc from a to b.

    Counterclockwise means increasing time; the arc wraps through 2n == 0 when
    a > b.  The degenerate arc [a, a] is the single point a.
    """
    _check_times(e, a, b)
    a_a = np.asarray(a, dtype=np.int64)
    b_a = np.asarray(b, dtype=np.int64)
    top = 2 * e.n
    wrap = a_a > b_a
    lin = idx.range_min(np.where(wrap, 0, a_a), b_a)
    tail = idx.range_min(np.where(wrap, a_a, 0), np.where(wrap, top, 0))
    out = np.where(wrap, np.minimum(lin, tail), lin)
    if np.isscalar(a) and np.isscalar(b):
        return int(out)
    return out


def max_arc_min(e: DiscreteExcursion, idx: RmqIndex, a, b):
    """Larger of the two arc minima separating a and b on the circle.

    For an excursion this equals the height of the nearest common ancestor of
    the vertices visited at times a and b: the arc through time 0 always has
    minimum 0, so the max picks out the minimum over the direct time range.
    """
    out = np.maximum(arc_min(e, idx, a, b), arc_min(e, idx, b, a))
    if np.isscalar(a) and np.isscalar(b):
        return int(out)
    return out


def tree_pseudo_distance(e: DiscreteExcursion, idx: RmqIndex, a, b):
    """Exact integer pseudo-distance heights[a] + heights[b] - 2 * max_arc_min.

    Nonnegative, symmetric, satisfies the triangle inequality, and vanishes
    exactly when a and b visit the same tree vertex.
    """
    _check_times(e, a, b)
    a_a = np.asarray(a, dtype=np.int64)
    b_a = np.asarray(b, dtype=np.int64)
    out = e.heights[a_a] + e.heights[b_a] - 2 * np.asarray(max_arc_min(e, idx, a, b))
    if np.isscalar(a) and np.isscalar(b):
        return int(out)
    return out


@dataclass(frozen=True)
class LocalMinimaReport:
    """Strict local minima of a sampled circle function, plus their value gaps."""

    positions: np.ndarray
    values: np.ndarray
    min_gap: float | None
    degenerate: bool

    def distinct_at(self, tol: float) -> bool:
        """Whether all reported minima are pairwise more than ``tol`` apart in value."""
        return self.min_gap is not None and self.min_gap > tol

    @property
    def count(self) -> int:
        return int(self.positions.size)


def local_minima_report(values, tol: float = 0.0) -> LocalMinimaReport:
    """Report all strict local minima of a function sampled on the circle.

    ``values`` are read cyclically (position i neighbors i-1 and i+1 mod len).
    A constant function has no strict minima and is flagged degenerate.  The
    min-gap is the smallest difference between two distinct minima values (0.0
    when two minima tie exactly); it is None when fewer than two minima exist.
    The caller judges genericity of the sampled function at this resolution,
    e.g. via ``distinct_at(tol)``.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 3:
        raise ValueError("need at least 3 sample points on the circle")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if np.ptp(v) == 0:
        empty = np.asarray([], dtype=np.int64)
        return LocalMinimaReport(empty, empty.astype(np.float64), None, True)
    prev = np.roll(v, 1)
    nxt = np.roll(v, -1)
    mask = (v < prev) & (v < nxt)
    positions = np.nonzero(mask)[0].astype(np.int64)
    vals = v[positions]
    if positions.size < 2:
        return LocalMinimaReport(positions, vals, None, False)
    gaps = np.diff(np.sort(vals))
    return LocalMinimaReport(positions, vals, float(gaps.min()), False)


def excursion_to_json(e: DiscreteExcursion, config: dict | None = None) -> str:
    """Serialize as {"n", "seed", "steps"} plus format/config header fields."""
    doc = {
        "format_version": FORMAT_VERSION,
        "config": config or {},
        "n": int(e.n),
        "seed": int(e.seed),
        "steps": [int(s) for s in e.steps],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def excursion_from_json(text: str) -> DiscreteExcursion:
    """Load an excursion file; heights are recomputed and all invariants checked."""
    doc = json.loads(text)
    e = DiscreteExcursion.from_steps(doc["steps"], seed=doc.get("seed", 0))
    if e.n != int(doc["n"]):
        raise ValueError(f"declared n={doc['n']} but steps give n={e.n}")
    return e
