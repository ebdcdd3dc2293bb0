"""One-step and chained map pseudo-metrics over re-rooted label functions.

After re-rooting at the minimal label, the one-step pseudo-metric between two
circle positions is

    d_circ(a, b) = zbar[a] + zbar[b] - 2 * max(arc minima of zbar)

where the two arcs are the minimal counterclockwise arcs between the contour
classes of a and b (each running from a class representative to the first
representative of the other class).  Taking minimal class arcs makes d_circ a
function of the tree classes: positions visiting the same vertex get exactly
equal rows.  The chained metric d_star is the shortest-path closure of d_circ
over a finite sample of positions, computed by dense Dijkstra with lazily
evaluated edges; restricting chains to the sample yields an upper bound of the
fully-chained value restricted to sampled points.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .circle_tree import CircleTree, build_circle_tree, class_positions
from .excursion import DiscreteExcursion, RmqIndex, build_rmq, tree_pseudo_distance
from .snake import LabelFunction, Rerooted, reroot

__all__ = [
    "MapMetricSample",
    "ZeroClassReport",
    "IsometryReport",
    "build_map_metric_sample",
    "d_circ",
    "d_star_from",
    "zero_class_check",
    "reroot_isometry_check",
]


@dataclass(eq=False)
class MapMetricSample:
    """Sampled contour positions with the re-rooted labels and their index.

    ``times`` are distinct circle positions (sorted); ``zbar_full`` is the full
    2n+1 re-rooted label sequence with an exact range-minimum index over it;
    ``class_of`` maps circle positions to re-rooted contour-tree classes and
    ``class_reps`` lists each class's sorted positions.  Dijkstra rows are
    cached per source.
    """

    n: int
    times: np.ndarray
    zbar_full: np.ndarray
    zbar_rmq: RmqIndex
    class_of: np.ndarray
    class_reps: list[list[int]]
    rerooted: Rerooted
    _dstar_rows: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def sample_size(self) -> int:
        return int(self.times.size)

    @property
    def zbar(self) -> np.ndarray:
        """Re-rooted labels at the sampled positions."""
        return self.zbar_full[self.times]


def build_map_metric_sample(
    e: DiscreteExcursion,
    labels: LabelFunction,
    sample_size: int | None = None,
    seed: int = 0,
) -> MapMetricSample:
    """Re-root the pair and select all positions or a stratified subsample.

    With ``sample_size`` = N, the circle is cut into N equal strata and one
    position is drawn uniformly in each, which keeps the sample spread while
    staying seed-reproducible.
    """
    rr = reroot(e, labels)
    two_n = 2 * e.n
    if sample_size is None or sample_size >= two_n:
        times = np.arange(two_n, dtype=np.int64)
    else:
        if sample_size < 2:
            raise ValueError("sample_size must be >= 2")
        rng = np.random.default_rng(seed)
        edges = np.linspace(0, two_n, sample_size + 1)
        lo = np.floor(edges[:-1]).astype(np.int64)
        hi = np.maximum(lo + 1, np.floor(edges[1:]).astype(np.int64))
        times = np.unique(lo + (rng.random(sample_size) * (hi - lo)).astype(np.int64))
    tree_bar = build_circle_tree(rr.e_bar)
    reps = [list(map(int, pos)) for pos in class_positions(tree_bar)]
    return MapMetricSample(
        n=e.n,
        times=times,
        zbar_full=rr.z_bar,
        zbar_rmq=RmqIndex(rr.z_bar),
        class_of=tree_bar.class_id[:two_n].copy(),
        class_reps=reps,
        rerooted=rr,
    )


def _ccw_arc_min(s: MapMetricSample, x: int, y: int) -> int:
    """Min of zbar over the counterclockwise arc from position x to position y."""
    if x <= y:
        return int(s.zbar_rmq.range_min(x, y))
    two_n = 2 * s.n
    return int(
        min(s.zbar_rmq.range_min(x, two_n), s.zbar_rmq.range_min(0, y))
    )


def _min_ccw_gap(s: MapMetricSample, ca: int, cb: int) -> tuple[int, int]:
    """Endpoints (x in class ca, y in class cb) of the shortest ccw arc ca -> cb."""
    two_n = 2 * s.n
    a_reps = s.class_reps[ca]
    b_reps = s.class_reps[cb]
    best = None
    for x in a_reps:
        j = bisect_left(b_reps, x)
        y = b_reps[j] if j < len(b_reps) else b_reps[0]
        gap = (y - x) % two_n
        if best is None or gap < best[0]:
            best = (gap, x, y)
    return best[1], best[2]


def d_circ(s: MapMetricSample, i: int, j: int) -> int:
    """One-step pseudo-metric between sample indices i and j; exact integer.

    Symmetric, nonnegative, zero on the diagonal and on same-class pairs, and
    at least |zbar[a] - zbar[b]| since each minimal arc ends at class
    representatives carrying those values.
    """
    k = s.sample_size
    if not (0 <= i < k and 0 <= j < k):
        raise ValueError("sample index out of range")
    a, b = int(s.times[i]), int(s.times[j])
    ca, cb = int(s.class_of[a]), int(s.class_of[b])
    if ca == cb:
        return 0
    x1, y1 = _min_ccw_gap(s, ca, cb)
    x2, y2 = _min_ccw_gap(s, cb, ca)
    m = max(_ccw_arc_min(s, x1, y1), _ccw_arc_min(s, x2, y2))
    return int(s.zbar_full[a] + s.zbar_full[b] - 2 * m)


def d_star_from(s: MapMetricSample, source: int) -> np.ndarray:
    """Row of the chained pseudo-metric from a sample index, by dense Dijkstra.

    Edge weights are d_circ values evaluated lazily; O(N^2) time and O(N)
    memory.  Rows are cached on the sample.
    """
    if source in s._dstar_rows:
        return s._dstar_rows[source]
    k = s.sample_size
    if not 0 <= source < k:
        raise ValueError("sample index out of range")
    big = np.iinfo(np.int64).max
    dist = np.full(k, big, dtype=np.int64)
    done = np.zeros(k, dtype=bool)
    dist[source] = 0
    for _ in range(k):
        masked = np.where(done, big, dist)
        u = int(np.argmin(masked))
        if masked[u] == big:
            break
        done[u] = True
        du = int(dist[u])
        for v in range(k):
            if not done[v]:
                w = du + d_circ(s, u, v)
                if w < dist[v]:
                    dist[v] = w
    s._dstar_rows[source] = dist
    return dist


@dataclass(frozen=True)
class ZeroClassReport:
    passed: bool
    zero_pairs: int
    witness: tuple[int, int] | None


def zero_class_check(s: MapMetricSample, d_fn=None) -> ZeroClassReport:
    """Verify that zero chains collapse to zero edges on the sample.

    Zero d_circ edges can only join positions with equal zbar, so all candidate
    pairs are enumerated within equal-value groups; the zero-edge graph's
    connected components are then required to be all-pairs zero (a zero-weight
    chain exists iff a direct zero edge exists).  ``d_fn(i, j)`` may override
    the metric for fault injection.
    """
    d = d_fn or (lambda i, j: d_circ(s, i, j))
    k = s.sample_size
    zb = s.zbar
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(int(zb[i]), []).append(i)
    zero_edges: dict[tuple[int, int], bool] = {}
    n_zero = 0
    for members in groups.values():
        for ii in range(len(members)):
            for jj in range(ii + 1, len(members)):
                i, j = members[ii], members[jj]
                is_zero = d(i, j) == 0
                zero_edges[(i, j)] = is_zero
                if is_zero:
                    n_zero += 1
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
    # every intra-component pair must be a direct zero edge
    for (i, j), is_zero in zero_edges.items():
        if not is_zero and find(i) == find(j):
            return ZeroClassReport(False, n_zero, (i, j))
    # pairs in different value groups can never chain to zero; verify symmetry
    # and the diagonal on a sweep of adjacent pairs as a cheap guard
    for i in range(k):
        if d(i, i) != 0:
            return ZeroClassReport(False, n_zero, (i, i))
    for i in range(k - 1):
        if d(i, i + 1) != d(i + 1, i):
            return ZeroClassReport(False, n_zero, (i, i + 1))
    return ZeroClassReport(True, n_zero, None)


@dataclass(frozen=True)
class IsometryReport:
    passed: bool
    checked: int
    violations: int
    witness: tuple[int, int] | None


def reroot_isometry_check(
    e: DiscreteExcursion, labels: LabelFunction, trials: int, seed: int
) -> IsometryReport:
    """Exact identities tying the re-rooted pair to the original one.

    For random position pairs (a, b): the re-rooted contour pseudo-distance
    equals the original one after shifting by s*, and zbar equals the shifted
    labels minus the label minimum.  All arithmetic is exact; any violation is
    returned with a witness pair.
    """
    rr = reroot(e, labels)
    two_n = 2 * e.n
    rng = np.random.default_rng(seed)
    a = rng.integers(0, two_n + 1, size=trials)
    b = rng.integers(0, two_n + 1, size=trials)
    idx = build_rmq(e)
    idx_bar = build_rmq(rr.e_bar)
    shift_a = (a + rr.s_star) % two_n
    shift_b = (b + rr.s_star) % two_n
    d_bar = np.asarray(tree_pseudo_distance(rr.e_bar, idx_bar, a, b))
    d_orig = np.asarray(tree_pseudo_distance(e, idx, shift_a, shift_b))
    bad = d_bar != d_orig
    z_ok = rr.z_bar[a] == labels.values[shift_a] - rr.underline_z
    bad |= ~z_ok
    violations = int(bad.sum())
    witness = None
    if violations:
        i = int(np.nonzero(bad)[0][0])
        witness = (int(a[i]), int(b[i]))
    return IsometryReport(
        passed=violations == 0, checked=trials, violations=violations, witness=witness
    )
