"""Box-counting (Minkowski) dimension estimation for chord families and circle sets.

Counts are taken over dyadic grids; the slope of log(count) against log(1/scale)
is fitted by least squares over a middle window of scales (the two coarsest and
two finest dyadic levels are dropped when enough scales are given) to dodge
lattice effects at the coarse end and finite-sample cutoffs at the fine end.

Segments are rasterized as straight Klein-model chords by dense sampling along
each segment at a quarter of the box side, which cannot miss a box that the
segment traverses for longer than that.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .circle_tree import CircleTree, class_positions
from .lamination import Lamination
from .snake import members_with_far_partner

__all__ = [
    "DimensionEstimate",
    "box_count_segments",
    "box_count_points",
    "segment_boxes",
    "point_boxes",
    "klein_segments",
    "endpoint_set",
    "dim_lower_bound_check",
    "dyadic_scales",
]


def dyadic_scales(coarse: int, fine: int) -> np.ndarray:
    """Scales 2^-coarse .. 2^-fine, coarse to fine."""
    if fine < coarse:
        raise ValueError("fine level must be >= coarse level")
    return np.asarray([2.0**-k for k in range(coarse, fine + 1)])


@dataclass(frozen=True)
class DimensionEstimate:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    stderr: float
    window: tuple[int, int]  # half-open index range of scales used in the fit

    @classmethod
    def from_counts(cls, scales, counts) -> "DimensionEstimate":
        scales = np.asarray(scales, dtype=np.float64)
        counts = np.asarray(counts, dtype=np.int64)
        order = np.argsort(-scales)  # coarse to fine
        scales, counts = scales[order], counts[order]
        if np.any(np.diff(counts) < 0):
            raise ValueError("box counts must be nonincreasing in the scale")
        lo, hi = _fit_window(scales.size)
        x = np.log(1.0 / scales[lo:hi])
        y = np.log(counts[lo:hi].astype(np.float64))
        slope, stderr = _ls_slope(x, y)
        return cls(scales=scales, counts=counts, slope=slope, stderr=stderr, window=(lo, hi))


def _fit_window(n_scales: int) -> tuple[int, int]:
    if n_scales < 2:
        raise ValueError("need at least 2 scales")
    if n_scales >= 6:
        return 2, n_scales - 2
    if n_scales >= 4:
        return 1, n_scales - 1
    return 0, n_scales


def _ls_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    if x.size > 2:
        resid = y - ym - slope * (x - xm)
        stderr = math.sqrt(float((resid**2).sum()) / (x.size - 2) / sxx)
    else:
        stderr = 0.0
    return slope, stderr


def segment_boxes(segments: np.ndarray, scale: float, grid_offset: float = 0.0) -> int:
    """Number of grid boxes of side ``scale`` met by the segments (in [-1,1]^2).

    ``segments`` is (K, 4) rows (x1, y1, x2, y2).  Occupancy by dense sampling
    at spacing scale/4 along each segment, endpoints included.  ``grid_offset``
    shifts the grid by that fraction of a box (for stability checks).
    """
    seg = np.asarray(segments, dtype=np.float64)
    if seg.ndim != 2 or seg.shape[1] != 4 or seg.shape[0] == 0:
        raise ValueError("segments must be a nonempty (K, 4) array")
    a = seg[:, :2]
    b = seg[:, 2:]
    lengths = np.hypot(*(b - a).T)
    counts = np.maximum(2, np.ceil(lengths / (scale / 4.0)).astype(np.int64) + 1)
    total = int(counts.sum())
    row = np.repeat(np.arange(seg.shape[0]), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    within = np.arange(total) - np.repeat(starts, counts)
    t = within / np.repeat(counts - 1, counts)
    pts = a[row] + t[:, None] * (b[row] - a[row])
    return _count_boxes_2d(pts, scale, grid_offset)


def _count_boxes_2d(pts: np.ndarray, scale: float, grid_offset: float) -> int:
    shift = 1.0 + grid_offset * scale
    ix = np.floor((pts[:, 0] + shift) / scale).astype(np.int64)
    iy = np.floor((pts[:, 1] + shift) / scale).astype(np.int64)
    stride = int(np.ceil(4.0 / scale)) + 4
    return int(np.unique(ix * stride + iy).size)


def box_count_segments(segments, scales, grid_offset: float = 0.0) -> DimensionEstimate:
    scales = np.asarray(scales, dtype=np.float64)
    counts = [segment_boxes(segments, float(s), grid_offset) for s in scales]
    return DimensionEstimate.from_counts(scales, counts)


def point_boxes(points: np.ndarray, scale: float, grid_offset: float = 0.0) -> int:
    """Number of arcs of length ``scale`` (fraction of the circle) met by points in [0,1)."""
    p = np.asarray(points, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty point set")
    nbins = int(round(1.0 / scale))
    idx = np.floor((p + grid_offset * scale) * nbins).astype(np.int64) % nbins
    return int(np.unique(idx).size)


def box_count_points(points, scales, grid_offset: float = 0.0) -> DimensionEstimate:
    scales = np.asarray(scales, dtype=np.float64)
    counts = [point_boxes(points, float(s), grid_offset) for s in scales]
    return DimensionEstimate.from_counts(scales, counts)


def klein_segments(lam: Lamination) -> np.ndarray:
    """Chords as straight segments (K, 4) between their circle endpoints."""
    if not lam.chords:
        raise ValueError("empty lamination")
    ang = np.asarray([(ch.a, ch.b) for ch in lam.chords], dtype=np.float64)
    return np.column_stack(
        [np.cos(ang[:, 0]), np.sin(ang[:, 0]), np.cos(ang[:, 1]), np.sin(ang[:, 1])]
    )


def endpoint_set(tree: CircleTree, min_separation: int = 0) -> np.ndarray:
    """Circle positions whose class is not a singleton, as fractions in [0, 1).

    With ``min_separation`` > 0 only positions that have a classmate at cyclic
    distance at least that many contour steps are kept.  The unfiltered set is
    asymptotically dense (a positive fraction of all contour times visits an
    internal vertex); the macroscopically paired subset is the one whose box
    counts scale with the continuum endpoint-set dimension 1/2.
    """
    two_n = 2 * tree.n
    keep = []
    for pos in class_positions(tree):
        if pos.size < 2:
            continue
        if min_separation > 0:
            mask = members_with_far_partner(pos, two_n, min_separation)
            keep.append(pos[mask])
        else:
            keep.append(pos)
    if not keep:
        return np.asarray([], dtype=np.float64)
    merged = np.unique(np.concatenate(keep))
    return merged.astype(np.float64) / two_n


def dim_lower_bound_check(
    lamination_estimate: DimensionEstimate,
    endpoint_estimate: DimensionEstimate,
    tol: float,
) -> bool:
    """Whether slope(lamination) >= 1 + slope(endpoints) within ``tol``."""
    return lamination_estimate.slope >= 1.0 + endpoint_estimate.slope - tol
