"""Integer label processes on contour trees and the spatial re-rooting transform.

Labels are built by summing i.i.d. edge increments along root paths, then read
off along the contour, so they are class-constant by construction: contour
times visiting the same vertex carry the same label.  Conditionally on the
tree, the covariance of the labels at two times is (increment variance) times
the common-ancestor height, the discrete analog of the snake-head covariance.

Re-rooting shifts the circle parametrization to the time of the minimal label
and produces a new excursion-shaped contour together with nonnegative shifted
labels; it is the transform under which the one-step map pseudo-metric is
naturally expressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circle_tree import CircleTree, circle_class_partition, class_positions
from .excursion import (
    DiscreteExcursion,
    LocalMinimaReport,
    RmqIndex,
    local_minima_report,
)

__all__ = [
    "LabelFunction",
    "Rerooted",
    "CovarianceEstimate",
    "HprimeReport",
    "INCREMENT_LAWS",
    "LAW_VARIANCE",
    "sample_labels",
    "labels_from_increments",
    "covariance_estimate",
    "reroot",
    "hypothesis_check_HZ",
    "hypothesis_check_Hprime",
    "members_with_far_partner",
    "reverse_pair",
    "labels_to_json",
    "labels_from_json",
]

INCREMENT_LAWS: dict[str, tuple[int, ...]] = {"u3": (-1, 0, 1), "pm1": (-1, 1)}
LAW_VARIANCE: dict[str, float] = {"u3": 2.0 / 3.0, "pm1": 1.0}


@dataclass(frozen=True, eq=False)
class LabelFunction:
    """Integer labels aligned with contour times; values[0] == values[2n] == 0."""

    values: np.ndarray
    law: str
    seed: int


@dataclass(frozen=True, eq=False)
class Rerooted:
    """Contour pair re-rooted at the minimal label position ``s_star``.

    e_bar is a valid excursion; z_bar is nonnegative with z_bar[0] == 0 and
    min(z_bar) == 0; underline_z is the minimum of the original labels.
    """

    s_star: int
    e_bar: DiscreteExcursion
    z_bar: np.ndarray
    underline_z: int


def labels_from_increments(tree: CircleTree, increments) -> np.ndarray:
    """Contour labels from per-vertex edge increments (entry for the root ignored).

    increments[v] is the increment on the edge parent(v) -> v.  Vertices are in
    first-visit order so a single forward pass accumulates root-path sums.
    """
    inc = np.asarray(increments, dtype=np.int64)
    if inc.size != tree.n_vertices:
        raise ValueError("need one increment per vertex")
    vertex_label = np.zeros(tree.n_vertices, dtype=np.int64)
    parent = tree.parent
    for v in range(1, tree.n_vertices):
        vertex_label[v] = vertex_label[parent[v]] + inc[v]
    return vertex_label[tree.class_id]


def sample_labels(tree: CircleTree, law: str = "u3", seed: int = 0) -> LabelFunction:
    """Attach i.i.d. edge increments from ``law`` and read labels along the contour."""
    if tree.n_vertices < 2:
        raise ValueError("tree must have at least one edge")
    if law not in INCREMENT_LAWS:
        raise ValueError(f"unknown increment law {law!r}")
    rng = np.random.default_rng(seed)
    support = np.asarray(INCREMENT_LAWS[law], dtype=np.int64)
    inc = support[rng.integers(0, support.size, size=tree.n_vertices)]
    inc[0] = 0
    return LabelFunction(values=labels_from_increments(tree, inc), law=law, seed=int(seed))


@dataclass(frozen=True)
class CovarianceEstimate:
    estimate: float
    stderr: float
    replicates: int


def _root_path(tree: CircleTree, v: int) -> np.ndarray:
    path = []
    while v != 0:
        path.append(v)
        v = int(tree.parent[v])
    return np.asarray(path, dtype=np.int64)


def covariance_estimate(
    tree: CircleTree,
    law: str,
    s: int,
    t: int,
    replicates: int,
    seed: int,
    chunk: int = 20_000,
) -> CovarianceEstimate:
    """Monte Carlo estimate of E[Z_s Z_t | tree] over independent label draws.

    The exact conditional value is (increment variance) * (common ancestor
    height); for the u3 law the variance is 2/3.  Labels at only the two
    requested times are materialized, via root-path increment sums, so the cost
    is O(replicates * depth).
    """
    if replicates < 1000:
        raise ValueError("need at least 10^3 replicates")
    support = np.asarray(INCREMENT_LAWS[law], dtype=np.int64)
    rng = np.random.default_rng(seed)
    path_s = _root_path(tree, int(tree.class_id[s]))
    path_t = _root_path(tree, int(tree.class_id[t]))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < replicates:
        m = min(chunk, replicates - done)
        inc = support[rng.integers(0, support.size, size=(m, tree.n_vertices))]
        zs = inc[:, path_s].sum(axis=1) if path_s.size else np.zeros(m, dtype=np.int64)
        zt = inc[:, path_t].sum(axis=1) if path_t.size else np.zeros(m, dtype=np.int64)
        prod = (zs * zt).astype(np.float64)
        total += float(prod.sum())
        total_sq += float((prod * prod).sum())
        done += m
    mean = total / replicates
    var = max(total_sq / replicates - mean * mean, 0.0)
    stderr = (var / replicates) ** 0.5
    return CovarianceEstimate(estimate=mean, stderr=stderr, replicates=replicates)


def reroot(e: DiscreteExcursion, labels: LabelFunction) -> Rerooted:
    """Re-root the pair at the time of minimal label (smallest index on ties).

    With s* the minimizer and (+) cyclic addition mod 2n,

        e_bar[t] = e[s*] + e[s* (+) t] - 2 * min(e over the direct range)
        z_bar[t] = Z[s* (+) t] - Z[s*]

    e_bar is again a nonnegative unit-step excursion (it is the contour of the
    same tree re-rooted at the vertex visited at s*).
    """
    z = labels.values
    h = e.heights
    two_n = 2 * e.n
    if z.size != two_n + 1:
        raise ValueError("labels not aligned with excursion")
    s = int(np.argmin(z))
    underline = int(z[s])
    t = np.arange(two_n + 1, dtype=np.int64)
    shifted = (s + t) % two_n
    lo = np.minimum(s, shifted)
    hi = np.maximum(s, shifted)
    idx = RmqIndex(h)
    e_bar_heights = h[s] + h[shifted] - 2 * idx.range_min(lo, hi)
    z_bar = z[shifted] - underline
    e_bar = DiscreteExcursion.from_steps(np.diff(e_bar_heights), seed=e.seed)
    return Rerooted(s_star=s, e_bar=e_bar, z_bar=z_bar, underline_z=underline)


def hypothesis_check_HZ(values, resolution: float) -> LocalMinimaReport:
    """Local-minima distinctness probe at a coarse circle resolution.

    ``values`` is a label (or any) sequence of length 2n+1 on the closed
    circle; it is subsampled at stride round(2n * resolution) and the strict
    local minima of the coarsened cyclic function are reported.  A zero min-gap
    flags tied minima at that resolution; constants are flagged degenerate.
    """
    v = np.asarray(values)
    if v.ndim != 1 or v.size < 4:
        raise ValueError("need a sequence of at least 4 values")
    m = v.size - 1
    stride = max(1, int(round(m * resolution)))
    sub = v[:m][::stride]
    if sub.size < 3:
        raise ValueError("resolution too coarse: fewer than 3 samples remain")
    return local_minima_report(sub)


def members_with_far_partner(sorted_pos: np.ndarray, circumference: int, separation: int) -> np.ndarray:
    """Boolean mask over sorted class positions: has some classmate at cyclic
    distance >= separation."""
    k = sorted_pos.size
    out = np.zeros(k, dtype=bool)
    half = circumference // 2
    if k < 2 or separation > half:
        return out  # cyclic distance never exceeds half the circumference
    for i in range(k):
        a = int(sorted_pos[i])
        # the classmate closest to the antipode maximizes cyclic distance, and
        # it is one of the two sorted flanks of the antipode position
        target = (a + half) % circumference
        j = int(np.searchsorted(sorted_pos, target))
        best = 0
        for jj in (j - 1, j % k):
            b = int(sorted_pos[jj % k])
            if b == a:
                continue
            diff = abs(b - a)
            best = max(best, min(diff, circumference - diff))
        if best >= separation:
            out[i] = True
    return out


@dataclass(frozen=True)
class HprimeReport:
    count: int
    fraction: float
    separation: int
    degenerate_labels: bool


def hypothesis_check_Hprime(
    e: DiscreteExcursion, tree: CircleTree, labels: LabelFunction, separation: int
) -> HprimeReport:
    """Count circle positions that are doubly nontrivial at a separation scale.

    A position a counts when it has a contour classmate b (same tree vertex)
    and a label classmate c (zero label pseudo-distance) both at cyclic
    distance >= separation.  In the continuum this count is 0 almost surely;
    the discrete fraction should decay as n grows.  A constant label function
    makes every position label-equivalent to every other and is flagged.
    """
    if separation < 1:
        raise ValueError("separation must be >= 1 contour step")
    two_n = 2 * e.n
    far_e = np.zeros(two_n, dtype=bool)
    for pos in class_positions(tree):
        if pos.size >= 2:
            far_e[pos] = members_with_far_partner(pos, two_n, separation)
    z_classes = circle_class_partition(labels.values)
    far_z = np.zeros(two_n, dtype=bool)
    order = np.argsort(z_classes, kind="stable")
    sorted_ids = z_classes[order]
    bounds = np.searchsorted(sorted_ids, np.arange(z_classes.max() + 2))
    for c in range(int(z_classes.max()) + 1):
        pos = np.sort(order[bounds[c] : bounds[c + 1]])
        if pos.size >= 2:
            far_z[pos] = members_with_far_partner(pos, two_n, separation)
    both = far_e & far_z
    count = int(both.sum())
    return HprimeReport(
        count=count,
        fraction=count / two_n,
        separation=int(separation),
        degenerate_labels=bool(np.ptp(labels.values) == 0),
    )


def reverse_pair(
    e: DiscreteExcursion, labels: LabelFunction
) -> tuple[DiscreteExcursion, LabelFunction]:
    """Time-reversed pair (t -> 2n - t); the label law is invariant under it."""
    e_rev = DiscreteExcursion.from_steps(-e.steps[::-1], seed=e.seed)
    return e_rev, LabelFunction(values=labels.values[::-1].copy(), law=labels.law, seed=labels.seed)


def labels_to_json(labels: LabelFunction, config: dict | None = None) -> str:
    doc = {
        "format_version": 1,
        "config": config or {},
        "seed": int(labels.seed),
        "law": labels.law,
        "values": [int(v) for v in labels.values],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def labels_from_json(text: str) -> LabelFunction:
    doc = json.loads(text)
    values = np.asarray(doc["values"], dtype=np.int64)
    if doc["law"] not in INCREMENT_LAWS:
        raise ValueError(f"unknown increment law {doc['law']!r}")
    if values[0] != 0 or values[-1] != 0:
        raise ValueError("labels must vanish at the root time")
    return LabelFunction(values=values, law=doc["law"], seed=int(doc["seed"]))
