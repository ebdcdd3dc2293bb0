"""The plane tree carved out of a contour function, with exact class structure.

Gluing the circle along zero pseudo-distance yields a rooted plane tree; each
tree vertex is an equivalence class of contour times.  The construction here is
the O(n) stack scan (a new vertex per up-step, pop per down-step), not the
quadratic pairwise closure, but the two must agree exactly and the tests hold
them to that.

``circle_class_partition`` computes the same kind of quotient for an arbitrary
integer-valued circle function (labels included), by cutting the circle at a
global minimum and sweeping a monotone stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .excursion import DiscreteExcursion, RmqIndex, tree_pseudo_distance

__all__ = [
    "CircleTree",
    "PlaneTree",
    "PseudometricReport",
    "build_circle_tree",
    "plane_tree_oracle",
    "class_histogram",
    "separated_class_stats",
    "verify_pseudometric",
    "tree_distance",
    "circle_class_partition",
    "class_positions",
]


@dataclass(eq=False)
class CircleTree:
    """Quotient of the time circle by zero contour pseudo-distance.

    ``class_id[t]`` is the tree vertex visited at contour time t (length 2n+1,
    with class_id[0] == class_id[2n] == root).  Vertices are numbered in
    first-visit order, root = 0.  ``children`` lists are in plane (contour)
    order.
    """

    n: int
    class_id: np.ndarray
    vertex_height: np.ndarray
    parent: np.ndarray
    children: list[list[int]]
    first_visit: np.ndarray

    @property
    def n_vertices(self) -> int:
        return int(self.vertex_height.size)

    @property
    def n_edges(self) -> int:
        return self.n_vertices - 1


@dataclass(eq=False)
class PlaneTree:
    """Rooted plane tree as parent array in depth-first order (oracle form)."""

    parent: np.ndarray
    children: list[list[int]]

    @property
    def n_vertices(self) -> int:
        return int(self.parent.size)

    def degree_sequence(self) -> tuple[int, ...]:
        """Out-degrees in depth-first order; a canonical plane-tree invariant."""
        return tuple(len(c) for c in self.children)


def build_circle_tree(e: DiscreteExcursion) -> CircleTree:
    """Materialize the quotient tree of an excursion in O(n).

    Up-steps push a fresh child of the current vertex; down-steps pop.  The
    class of each time is the vertex on top of the stack when that time is
    visited, which realizes exactly the criterion

        class_id[a] == class_id[b]  iff  d(a, b) == 0.
    """
    steps = e.steps
    two_n = 2 * e.n
    class_id = np.zeros(two_n + 1, dtype=np.int64)
    vertex_height = [0]
    parent = [-1]
    children: list[list[int]] = [[]]
    first_visit = [0]
    stack = [0]
    next_id = 1
    for t in range(1, two_n + 1):
        if steps[t - 1] == 1:
            v = next_id
            next_id += 1
            p = stack[-1]
            parent.append(p)
            children[p].append(v)
            children.append([])
            vertex_height.append(vertex_height[p] + 1)
            first_visit.append(t)
            stack.append(v)
        else:
            stack.pop()
        class_id[t] = stack[-1]
    return CircleTree(
        n=e.n,
        class_id=class_id,
        vertex_height=np.asarray(vertex_height, dtype=np.int64),
        parent=np.asarray(parent, dtype=np.int64),
        children=children,
        first_visit=np.asarray(first_visit, dtype=np.int64),
    )


def plane_tree_oracle(steps) -> PlaneTree:
    """Independent Dyck-path parser: push on +1, pop on -1.  Test oracle only.

    Rejects unbalanced or sign-invalid input.
    """
    steps = np.asarray(steps, dtype=np.int64)
    if steps.size == 0 or not np.all(np.abs(steps) == 1):
        raise ValueError("not a +-1 step sequence")
    parent = [-1]
    children: list[list[int]] = [[]]
    stack = [0]
    for s in steps:
        if s == 1:
            v = len(parent)
            parent.append(stack[-1])
            children[stack[-1]].append(v)
            children.append([])
            stack.append(v)
        else:
            stack.pop()
            if not stack:
                raise ValueError("unbalanced step sequence: walk closes below the root")
    if len(stack) != 1:
        raise ValueError("unbalanced step sequence: walk does not return to the root")
    return PlaneTree(parent=np.asarray(parent, dtype=np.int64), children=children)


def class_histogram(tree: CircleTree) -> dict[int, int]:
    """Histogram {class size: count} of contour-time class sizes.

    Sizes count contour times in {0, ..., 2n}, so the root picks up both
    boundary visits 0 and 2n: a vertex with c children and a parent is visited
    c+1 times, the root c+1 times as well.
    """
    sizes = np.bincount(tree.class_id)
    hist: dict[int, int] = {}
    for s in sizes:
        hist[int(s)] = hist.get(int(s), 0) + 1
    return hist


def class_positions(tree: CircleTree) -> list[np.ndarray]:
    """Circle positions (times mod 2n, deduplicated) visited by each vertex.

    The root's visits at 0 and 2n collapse to the single circle position 0.
    Positions are sorted ascending per class.
    """
    two_n = 2 * tree.n
    pos = np.arange(two_n, dtype=np.int64)
    order = np.argsort(tree.class_id[:two_n], kind="stable")
    sorted_ids = tree.class_id[:two_n][order]
    bounds = np.searchsorted(sorted_ids, np.arange(tree.n_vertices + 1))
    return [np.sort(pos[order[bounds[v] : bounds[v + 1]]]) for v in range(tree.n_vertices)]


def _min_pairwise_cyclic_gap(sorted_pos: np.ndarray, circumference: int) -> int:
    gaps = np.diff(np.concatenate([sorted_pos, sorted_pos[:1] + circumference]))
    return int(np.minimum(gaps, circumference - gaps).min())


def separated_class_stats(tree: CircleTree, min_separation: int) -> tuple[int, int, float]:
    """Continuum-class-size proxy: among classes with >= 2 circle points all
    pairwise at cyclic distance >= min_separation, how many have >= 4 points?

    Returns (n_separated, n_separated_large, fraction); fraction is 0.0 when no
    class qualifies.  In the continuum, well-separated classes have at most 3
    points, so the fraction should shrink as n grows.
    """
    two_n = 2 * tree.n
    n_sep = 0
    n_large = 0
    for pos in class_positions(tree):
        if pos.size < 2:
            continue
        if _min_pairwise_cyclic_gap(pos, two_n) >= min_separation:
            n_sep += 1
            if pos.size >= 4:
                n_large += 1
    frac = n_large / n_sep if n_sep else 0.0
    return n_sep, n_large, frac


def tree_distance(tree: CircleTree, u: int, v: int) -> int:
    """Graph distance between two tree vertices by walking parents to the LCA.

    Independent of the range-minimum machinery; used to cross-check the
    contour-time distance formula.
    """
    h = tree.vertex_height
    du, dv = int(h[u]), int(h[v])
    steps = 0
    while du > dv:
        u = int(tree.parent[u])
        du -= 1
        steps += 1
    while dv > du:
        v = int(tree.parent[v])
        dv -= 1
        steps += 1
    while u != v:
        u = int(tree.parent[u])
        v = int(tree.parent[v])
        steps += 2
    return steps


@dataclass(frozen=True)
class PseudometricReport:
    passed: bool
    checked: int
    witness: tuple | None


def verify_pseudometric(
    e: DiscreteExcursion, idx: RmqIndex, trials: int, seed: int
) -> PseudometricReport:
    """Check symmetry, nonnegativity and the triangle inequality on random triples.

    All arithmetic is exact; the first violating witness (kind, a, b, c) is
    returned.  For tiny excursions all pairs are additionally swept, which makes
    fault injection deterministic.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    top = 2 * e.n

    def d(a, b):
        return np.asarray(tree_pseudo_distance(e, idx, a, b))

    if top + 1 <= 64:
        a, b = np.meshgrid(np.arange(top + 1), np.arange(top + 1), indexing="ij")
        a, b = a.ravel(), b.ravel()
        dab, dba = d(a, b), d(b, a)
        bad = np.nonzero(dab != dba)[0]
        if bad.size:
            i = int(bad[0])
            return PseudometricReport(False, int(a.size), ("symmetry", int(a[i]), int(b[i]), -1))
        bad = np.nonzero(dab < 0)[0]
        if bad.size:
            i = int(bad[0])
            return PseudometricReport(False, int(a.size), ("nonnegative", int(a[i]), int(b[i]), -1))
    a = rng.integers(0, top + 1, size=trials)
    b = rng.integers(0, top + 1, size=trials)
    c = rng.integers(0, top + 1, size=trials)
    dab, dba, dbc, dac = d(a, b), d(b, a), d(b, c), d(a, c)
    for kind, bad in (
        ("symmetry", dab != dba),
        ("nonnegative", dab < 0),
        ("triangle", dac > dab + dbc),
    ):
        hit = np.nonzero(bad)[0]
        if hit.size:
            i = int(hit[0])
            return PseudometricReport(False, trials, (kind, int(a[i]), int(b[i]), int(c[i])))
    return PseudometricReport(True, trials, None)


def circle_class_partition(values) -> np.ndarray:
    """Partition circle positions by the zero set of the pseudo-distance of ``values``.

    ``values`` has length L = (number of positions) + 1 with values[0] ==
    values[-1] (the circle closure); the result assigns a class id to each of
    the L-1 positions, numbered in first-visit order.  Two positions share a
    class exactly when the function equals their common value on one of the two
    closed arcs joining them.  Works for any integer-valued function (labels as
    well as heights): the circle is cut at a global minimum, where no class can
    straddle the cut without containing the cut point itself.
    """
    v = np.asarray(values, dtype=np.int64)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("values must have at least 2 entries")
    if v[0] != v[-1]:
        raise ValueError("values[0] must equal values[-1] (circle closure)")
    m = v.size - 1
    circle = v[:m]
    t0 = int(np.argmin(circle))
    rotated = np.concatenate([circle[t0:], circle[:t0], circle[t0 : t0 + 1]])
    raw = np.empty(m + 1, dtype=np.int64)
    stack: list[tuple[int, int]] = []  # (value, class id), values strictly increasing
    next_id = 0
    for i in range(m + 1):
        val = int(rotated[i])
        while stack and stack[-1][0] > val:
            stack.pop()
        if stack and stack[-1][0] == val:
            raw[i] = stack[-1][1]
        else:
            stack.append((val, next_id))
            raw[i] = next_id
            next_id += 1
    assert raw[m] == raw[0], "duplicate cut point must join the cut class"
    out = np.empty(m, dtype=np.int64)
    idx = (t0 + np.arange(m)) % m
    out[idx] = raw[:m]
    # renumber in first-visit order of the original circle
    remap = np.full(next_id, -1, dtype=np.int64)
    fresh = 0
    for cid in out:
        if remap[cid] < 0:
            remap[cid] = fresh
            fresh += 1
    return remap[out]
