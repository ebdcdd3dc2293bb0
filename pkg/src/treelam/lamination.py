"""Non-crossing chord diagrams on the disk built from circle equivalence classes.

Each equivalence class with at least two distinct circle points contributes the
chords between cyclically consecutive points (a class of m >= 3 points yields m
chords closing a polygon; a pair yields one chord).  Classes whose visits all
collapse to a single circle point (the root of a one-edge tree, say) contribute
nothing.  The resulting family is non-crossing, which ``check_noncrossing``
verifies by an exact sweep, and its complementary faces are enumerated from the
chord containment forest.

Rendering supports the Klein model (straight chords) and the Poincare model
(circular arcs orthogonal to the unit circle, diameters degenerating to
straight lines).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle_tree import CircleTree, class_positions
from .excursion import DiscreteExcursion, RmqIndex, tree_pseudo_distance

__all__ = [
    "Chord",
    "Lamination",
    "NoncrossReport",
    "FaceCensus",
    "MaximalityReport",
    "build_lamination",
    "lamination_from_positions",
    "check_noncrossing",
    "face_census",
    "maximality_probe",
    "render_svg",
    "chords_to_csv",
    "chords_from_csv",
]


@dataclass(frozen=True)
class Chord:
    """Chord of the unit circle between angles a < b (radians in [0, 2*pi))."""

    a: float
    b: float
    class_id: int = -1
    ta: int = -1  # circle positions when built from contour times, else -1
    tb: int = -1


@dataclass(eq=False)
class Lamination:
    chords: list[Chord]
    model: str = "klein"
    source: str = ""
    circumference: int = 0  # 2n when built from contour times, else 0


def _chord(pa: int, pb: int, circ: int, cid: int) -> Chord:
    unit = 2.0 * math.pi / circ
    return Chord(a=pa * unit, b=pb * unit, class_id=cid, ta=pa, tb=pb)


def lamination_from_positions(
    positions: list[np.ndarray], circumference: int, rule: str = "consecutive", source: str = ""
) -> Lamination:
    """Chords from per-class sorted circle positions.

    ``consecutive`` joins cyclically consecutive points of each class (the
    planar rule; a pair gives a single deduplicated chord).  ``all_pairs``
    joins every pair within a class, which is redundant for classes of size 3
    and may cross itself for larger discrete classes; it exists for
    side-by-side comparison only.
    """
    if rule not in ("consecutive", "all_pairs"):
        raise ValueError(f"unknown chord rule {rule!r}")
    chords: list[Chord] = []
    for cid, pos in enumerate(positions):
        m = pos.size
        if m < 2:
            continue
        if rule == "all_pairs":
            for i in range(m):
                for j in range(i + 1, m):
                    chords.append(_chord(int(pos[i]), int(pos[j]), circumference, cid))
        elif m == 2:
            chords.append(_chord(int(pos[0]), int(pos[1]), circumference, cid))
        else:
            for i in range(m):
                pa, pb = int(pos[i]), int(pos[(i + 1) % m])
                if pa > pb:
                    pa, pb = pb, pa
                chords.append(_chord(pa, pb, circumference, cid))
    return Lamination(chords=chords, source=source, circumference=circumference)


def build_lamination(tree: CircleTree, rule: str = "consecutive") -> Lamination:
    """Lamination of the contour-tree classes of an excursion."""
    return lamination_from_positions(
        class_positions(tree),
        circumference=2 * tree.n,
        rule=rule,
        source=f"contour-classes n={tree.n}",
    )


@dataclass(frozen=True)
class NoncrossReport:
    ok: bool
    witness: tuple[int, int] | None  # indices into lam.chords


def check_noncrossing(lam: Lamination) -> NoncrossReport:
    """Exact sweep for the nesting/disjointness dichotomy.

    Two chords cross exactly when their endpoints strictly interleave on the
    circle; shared endpoints are permitted.  O(K log K): chords sorted by
    (left, -right), a stack of open right endpoints witnesses any interleave.
    """
    items = []
    for i, ch in enumerate(lam.chords):
        a, b = (ch.a, ch.b) if ch.a <= ch.b else (ch.b, ch.a)
        items.append((a, -b, i))
    items.sort()
    stack: list[tuple[float, int]] = []  # (right endpoint, chord index)
    for a, neg_b, i in items:
        b = -neg_b
        while stack and stack[-1][0] <= a:
            stack.pop()
        if stack and b > stack[-1][0]:
            return NoncrossReport(False, (stack[-1][1], i))
        stack.append((b, i))
    return NoncrossReport(True, None)


@dataclass(frozen=True)
class FaceCensus:
    """Complementary faces of a non-crossing chord diagram.

    ``faces[j]`` lists the chord indices bounding face j; face 0 is the outer
    region bounded by the circle and the top-level chords.  For a non-crossing
    diagram the Euler count forces exactly len(chords) + 1 faces.
    """

    faces: list[list[int]]
    euler_ok: bool


def face_census(lam: Lamination) -> FaceCensus:
    order = []
    for i, ch in enumerate(lam.chords):
        a, b = (ch.a, ch.b) if ch.a <= ch.b else (ch.b, ch.a)
        order.append((a, -b, i))
    order.sort()
    children: dict[int, list[int]] = {-1: []}
    stack: list[tuple[float, int]] = []  # (right endpoint, chord index)
    for a, neg_b, i in order:
        b = -neg_b
        while stack and stack[-1][0] <= a:
            stack.pop()
        parent = stack[-1][1] if stack else -1
        children.setdefault(i, [])
        children[parent].append(i)
        stack.append((b, i))
    faces = [list(children[-1])]
    for i in range(len(lam.chords)):
        faces.append([i] + children[i])
    euler_ok = len(faces) == len(lam.chords) + 1
    return FaceCensus(faces=faces, euler_ok=euler_ok)


@dataclass(frozen=True)
class MaximalityReport:
    trials: int
    candidates: int
    violations: int

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.candidates if self.candidates else 0.0


def maximality_probe(
    lam: Lamination,
    e: DiscreteExcursion,
    idx: RmqIndex,
    trials: int,
    tol: int,
    seed: int = 0,
) -> MaximalityReport:
    """Fraction of chord-free random pairs that are far in the tree metric.

    Random position pairs whose straight chord crosses no lamination chord are
    candidates; a candidate violates maximality when its tree pseudo-distance
    exceeds ``tol`` (integer height units).  In the continuum the lamination is
    maximal and the fraction is 0; discretely it should decay with n.
    Degenerate draws (a == b) are skipped.
    """
    two_n = 2 * e.n
    if lam.circumference != two_n:
        raise ValueError("lamination was not built from this excursion")
    rng = np.random.default_rng(seed)
    c = np.asarray([ch.ta for ch in lam.chords], dtype=np.int64)
    d = np.asarray([ch.tb for ch in lam.chords], dtype=np.int64)
    swap = c > d
    c[swap], d[swap] = d[swap], c[swap]
    by_c = np.argsort(c, kind="stable")
    c_sorted, d_by_c = c[by_c], d[by_c]
    by_d = np.argsort(d, kind="stable")
    d_sorted, c_by_d = d[by_d], c[by_d]
    max_d_table = RmqIndex(-d_by_c) if c.size else None
    min_c_table = RmqIndex(c_by_d) if c.size else None

    a = rng.integers(0, two_n, size=trials)
    b = rng.integers(0, two_n, size=trials)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    proper = lo != hi

    crossing = np.zeros(trials, dtype=bool)
    if c.size:
        # type 1: lo < c < hi < d  <=>  some chord starts strictly inside and
        # ends strictly outside; detected via max d over the c-range
        i0 = np.searchsorted(c_sorted, lo, side="right")
        i1 = np.searchsorted(c_sorted, hi, side="left") - 1
        has = i0 <= i1
        s0 = np.where(has, i0, 0)
        s1 = np.where(has, i1, 0)
        max_d = -max_d_table.range_min(s0, s1)
        crossing |= has & (max_d > hi)
        # type 2: c < lo < d < hi
        j0 = np.searchsorted(d_sorted, lo, side="right")
        j1 = np.searchsorted(d_sorted, hi, side="left") - 1
        has2 = j0 <= j1
        t0 = np.where(has2, j0, 0)
        t1 = np.where(has2, j1, 0)
        min_c = min_c_table.range_min(t0, t1)
        crossing |= has2 & (min_c < lo)

    candidates = proper & ~crossing
    dist = np.asarray(tree_pseudo_distance(e, idx, lo, hi))
    violations = candidates & (dist > tol)
    return MaximalityReport(
        trials=trials, candidates=int(candidates.sum()), violations=int(violations.sum())
    )


def _svg_point(x: float, y: float, cx: float, cy: float, r: float) -> tuple[float, float]:
    return (cx + r * x, cy - r * y)


def render_svg(lam: Lamination, model: str, path: str, width_px: int = 800) -> None:
    """Write the chord diagram as SVG; deterministic bytes for fixed input.

    Klein: straight segments.  Poincare: arcs orthogonal to the unit circle
    (``A`` path commands); diameters degenerate to straight lines.
    """
    if model not in ("klein", "poincare"):
        raise ValueError(f"unknown model {model!r}")
    cx = cy = width_px / 2.0
    r = width_px / 2.0 * 0.95
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{width_px}" '
        f'viewBox="0 0 {width_px} {width_px}">',
        f'<!-- model={model} source={lam.source} chords={len(lam.chords)} -->',
        f'<circle cx="{cx:.6f}" cy="{cy:.6f}" r="{r:.6f}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    for ch in lam.chords:
        ax, ay = math.cos(ch.a), math.sin(ch.a)
        bx, by = math.cos(ch.b), math.sin(ch.b)
        x1, y1 = _svg_point(ax, ay, cx, cy, r)
        x2, y2 = _svg_point(bx, by, cx, cy, r)
        dot = ax * bx + ay * by
        if model == "klein" or dot < -1.0 + 1e-9:
            lines.append(
                f'<line x1="{x1:.6f}" y1="{y1:.6f}" x2="{x2:.6f}" y2="{y2:.6f}" '
                f'stroke="navy" stroke-width="0.6" fill="none"/>'
            )
        else:
            # circle through both endpoints orthogonal to the unit circle
            denom = 1.0 + dot
            ox, oy = (ax + bx) / denom, (ay + by) / denom
            rad = math.sqrt(max(ox * ox + oy * oy - 1.0, 0.0))
            ta = math.atan2(ay - oy, ax - ox)
            tb = math.atan2(by - oy, bx - ox)
            delta = math.atan2(math.sin(tb - ta), math.cos(tb - ta))
            sweep = 1 if delta < 0 else 0  # svg pixel y points down
            lines.append(
                f'<path d="M {x1:.6f} {y1:.6f} A {rad * r:.6f} {rad * r:.6f} 0 0 {sweep} '
                f'{x2:.6f} {y2:.6f}" stroke="navy" stroke-width="0.6" fill="none"/>'
            )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def chords_to_csv(lam: Lamination, config_comment: str = "") -> str:
    out = []
    if config_comment:
        out.append(f"# {config_comment}")
    out.append("a_deg,b_deg,class_id")
    for ch in lam.chords:
        out.append(f"{math.degrees(ch.a):.9f},{math.degrees(ch.b):.9f},{ch.class_id}")
    return "\n".join(out) + "\n"


def chords_from_csv(text: str) -> Lamination:
    chords = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("a_deg"):
            continue
        a_deg, b_deg, cid = line.split(",")
        a, b = math.radians(float(a_deg)), math.radians(float(b_deg))
        if a > b:
            a, b = b, a
        chords.append(Chord(a=a, b=b, class_id=int(cid)))
    return Lamination(chords=chords, source="csv")
