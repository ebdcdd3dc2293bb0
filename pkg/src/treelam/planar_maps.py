"""Uniform rooted 2k-angulations via labeled-tree bijections, plus graph probes.

A quadrangulation with n faces is sampled by drawing a uniform plane tree with
n edges, i.i.d. edge label increments in {-1, 0, +1}, and a root orientation
bit, then drawing the corner-successor chords: every corner connects to the
next corner (counterclockwise) whose label is one less, and the corners of
minimal label connect to one added vertex.  General 2k-angulations use the
bipartite mobile variant: a plane tree whose black vertices have exactly k-1
white children, white labels stepping by at least -1 around each black vertex,
and chords among white corners only.  Both routes produce each rooted map with
equal multiplicity, hence exactly uniform samples.

The embedding is realized concretely: corners sit on a circle, chords are
straight, and the added vertex sits at the center, which fixes the rotation
system (around a corner, chord ends sort by the counterclockwise offset of
their far endpoint; a chord to the center slots in at the antipode).  Face
tracing, Euler counts, degree and bipartiteness audits gate the construction.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .circle_tree import build_circle_tree
from .excursion import DiscreteExcursion, sample_dyck_excursion
from .snake import labels_from_increments

__all__ = [
    "PlanarMap",
    "LabeledTree",
    "MapSample",
    "MapAudit",
    "BallGrowth",
    "Finding",
    "BottleneckReport",
    "sample_quadrangulation",
    "sample_quadrangulation_with_tree",
    "sample_2k_angulation",
    "sample_2k_angulation_with_mobile",
    "quadrangulation_from_labeled_tree",
    "map_from_corners",
    "bfs_distances",
    "map_faces",
    "validate_map",
    "cvs_distance_audit",
    "ball_growth_profile",
    "bottleneck_scan",
    "build_tube_map",
    "canonical_form",
    "map_to_json",
    "map_from_json",
]


@dataclass(eq=False)
class PlanarMap:
    """Rooted combinatorial map as a half-edge rotation system.

    Half-edge h has origin ``vertex_of[h]``; ``next_he[h]`` is the next
    half-edge counterclockwise around that origin and ``opp[h]`` the same edge
    traversed backwards.  Faces are orbits of h -> next_he[opp[h]].
    """

    k: int
    n_faces: int
    next_he: np.ndarray
    opp: np.ndarray
    vertex_of: np.ndarray
    root: int
    _csr: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def n_half_edges(self) -> int:
        return int(self.next_he.size)

    @property
    def n_edges(self) -> int:
        return self.n_half_edges // 2

    @property
    def n_vertices(self) -> int:
        return int(self.vertex_of.max()) + 1

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form (indptr, indices), with edge multiplicities."""
        if self._csr is None:
            src = self.vertex_of
            dst = self.vertex_of[self.opp]
            order = np.argsort(src, kind="stable")
            indices = dst[order]
            counts = np.bincount(src, minlength=self.n_vertices)
            indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            self._csr = (indptr, indices.astype(np.int64))
        return self._csr


@dataclass(eq=False)
class LabeledTree:
    """Plane tree with integer vertex labels, root label 0."""

    parent: np.ndarray
    labels: np.ndarray


@dataclass(eq=False)
class MapSample:
    """A sampled map together with its generating labeled tree data.

    ``labels`` has one entry per map vertex (the added origin last, carrying
    min - 1); ``origin`` is the added vertex's id.
    """

    map: PlanarMap
    tree: LabeledTree
    labels: np.ndarray
    origin: int
    epsilon: int


# ---------------------------------------------------------------------------
# construction from corner sequences


def _successors(corner_label: np.ndarray) -> np.ndarray:
    """succ[t] = next corner counterclockwise with label one less; -1 at the minimum."""
    lab = np.asarray(corner_label, dtype=np.int64)
    m = lab.size
    lmin = int(lab.min())
    succ = np.full(m, -1, dtype=np.int64)
    shifted = lab - lmin
    order = np.argsort(shifted, kind="stable")
    sorted_lab = shifted[order]
    bounds = np.searchsorted(sorted_lab, np.arange(int(shifted.max()) + 2))
    by_label = [np.sort(order[bounds[v] : bounds[v + 1]]) for v in range(int(shifted.max()) + 1)]
    for lv in range(1, len(by_label)):
        src = by_label[lv]
        tgt = by_label[lv - 1]
        if src.size == 0:
            continue
        j = np.searchsorted(tgt, src, side="right")
        succ[src] = tgt[j % tgt.size]
    return succ


def map_from_corners(
    corner_vertex: np.ndarray,
    corner_label: np.ndarray,
    n_white: int,
    k: int,
    n_faces: int,
    epsilon: int,
    _conventions: tuple[int, int, int] = (1, 1, 1),
) -> PlanarMap:
    """Assemble the rotation system of the successor-chord map.

    Corner t's edge gets half-edges 2t (from the corner) and 2t+1 (from the
    partner corner or the added origin vertex, id ``n_white``).  Successor
    chords are routed along the contour, which pins the rotation system: within
    a corner the incoming chords come first, sorted by decreasing contour
    offset of their source (shallowest nesting first), and the outgoing chord
    closes the bundle; the origin vertex sees the minimal-label corners in
    reverse contour order.  These conventions are verified exhaustively by the
    enumeration tests: every rooted map arises from exactly (number of
    vertices) generating trees.  The root is half-edge ``epsilon`` of corner
    0's edge.
    """
    cv = np.asarray(corner_vertex, dtype=np.int64)
    cl = np.asarray(corner_label, dtype=np.int64)
    m = cv.size
    out_rule, inc_rule, ctr_rule = _conventions
    succ = _successors(cl)
    to_center = succ < 0

    vertex_of = np.empty(2 * m, dtype=np.int64)
    vertex_of[0::2] = cv
    vertex_of[1::2] = np.where(to_center, n_white, cv[np.maximum(succ, 0)])

    t = np.arange(m, dtype=np.int64)
    out_k1 = np.full(m, 0 if out_rule == 0 else m + 2, dtype=np.int64)
    inc = np.nonzero(~to_center)[0]
    inc_corner = succ[inc]
    off = (inc - inc_corner) % m
    inc_k1 = 1 + (off if inc_rule == 0 else m - off)
    ctr = np.nonzero(to_center)[0]
    ctr_key = ctr if ctr_rule == 0 else -ctr

    v_all = np.concatenate([cv[t], cv[inc_corner], np.full(ctr.size, n_white)])
    c_all = np.concatenate([t, inc_corner, ctr_key])
    k1_all = np.concatenate([out_k1, inc_k1, np.zeros(ctr.size, dtype=np.int64)])
    half_all = np.concatenate([2 * t, 2 * inc + 1, 2 * ctr + 1])

    order = np.lexsort((k1_all, c_all, v_all))
    v_sorted = v_all[order]
    h_sorted = half_all[order]
    next_he = np.empty(2 * m, dtype=np.int64)
    block_start = np.concatenate([[0], np.nonzero(np.diff(v_sorted))[0] + 1, [v_sorted.size]])
    for bi in range(block_start.size - 1):
        lo, hi = int(block_start[bi]), int(block_start[bi + 1])
        next_he[h_sorted[lo : hi - 1]] = h_sorted[lo + 1 : hi]
        next_he[h_sorted[hi - 1]] = h_sorted[lo]
    opp = np.arange(2 * m, dtype=np.int64) ^ 1
    return PlanarMap(
        k=k,
        n_faces=n_faces,
        next_he=next_he,
        opp=opp,
        vertex_of=vertex_of,
        root=int(epsilon),
    )


# ---------------------------------------------------------------------------
# samplers


def quadrangulation_from_labeled_tree(
    e: DiscreteExcursion, vertex_labels: np.ndarray, epsilon: int
) -> MapSample:
    """Deterministic successor-chord quadrangulation of a labeled contour tree."""
    tree = build_circle_tree(e)
    vertex_labels = np.asarray(vertex_labels, dtype=np.int64)
    corner_vertex = tree.class_id[: 2 * e.n]
    corner_label = vertex_labels[corner_vertex]
    pm = map_from_corners(corner_vertex, corner_label, tree.n_vertices, 2, e.n, epsilon)
    labels = np.concatenate([vertex_labels, [vertex_labels.min() - 1]])
    return MapSample(
        map=pm,
        tree=LabeledTree(parent=tree.parent, labels=vertex_labels),
        labels=labels,
        origin=tree.n_vertices,
        epsilon=int(epsilon),
    )


def sample_quadrangulation_with_tree(n: int, seed: int) -> MapSample:
    """Uniform rooted quadrangulation with n faces, with its generating tree."""
    if n < 1:
        raise ValueError("need n >= 1")
    e = sample_dyck_excursion(n, seed)
    rng = np.random.default_rng((int(seed), 0x5EED))
    tree = build_circle_tree(e)
    inc = rng.integers(-1, 2, size=tree.n_vertices)
    inc[0] = 0
    vertex_labels = np.zeros(tree.n_vertices, dtype=np.int64)
    for v in range(1, tree.n_vertices):
        vertex_labels[v] = vertex_labels[tree.parent[v]] + inc[v]
    epsilon = int(rng.integers(0, 2))
    corner_vertex = tree.class_id[: 2 * n]
    corner_label = vertex_labels[corner_vertex]
    pm = map_from_corners(corner_vertex, corner_label, tree.n_vertices, 2, n, epsilon)
    labels = np.concatenate([vertex_labels, [vertex_labels.min() - 1]])
    return MapSample(
        map=pm,
        tree=LabeledTree(parent=tree.parent, labels=vertex_labels),
        labels=labels,
        origin=tree.n_vertices,
        epsilon=epsilon,
    )


def sample_quadrangulation(n: int, seed: int) -> PlanarMap:
    return sample_quadrangulation_with_tree(n, seed).map


def _uniform_composition(total: int, parts: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sequence of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        return np.asarray([total], dtype=np.int64)
    bars = np.sort(rng.choice(total + parts - 1, size=parts - 1, replace=False))
    padded = np.concatenate([[-1], bars, [total + parts - 1]])
    return (np.diff(padded) - 1).astype(np.int64)


@dataclass(eq=False)
class Mobile:
    """Bipartite labeled tree: whites carry labels, blacks have k-1 white children."""

    k: int
    groups: list[list[list[int]]]  # groups[w][i] = white children of w's i-th black
    labels: np.ndarray  # per white vertex


def _decode_preorder(children_counts: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    m = children_counts.size
    parent = np.full(m, -1, dtype=np.int64)
    children: list[list[int]] = [[] for _ in range(m)]
    remaining = children_counts.copy()
    stack = [0]
    for i in range(1, m):
        while remaining[stack[-1]] == 0:
            stack.pop()
        p = stack[-1]
        remaining[p] -= 1
        parent[i] = p
        children[p].append(i)
        stack.append(i)
    return parent, children


def sample_mobile(n: int, k: int, rng: np.random.Generator) -> Mobile:
    """Uniform mobile with n black vertices of degree k.

    The white skeleton (each white's children coming in blocks of k-1 under one
    black) is drawn by the cycle lemma: a uniform composition of n into
    (k-1)n + 1 parts, rotated to the unique position whose prefix walk stays
    nonnegative.  Label increments around each black are a uniform composition
    of k into k parts shifted down by one (each step >= -1, total 0).
    """
    m = (k - 1) * n + 1
    b = _uniform_composition(n, m, rng)
    steps = (k - 1) * b - 1
    cut = int(np.argmin(np.cumsum(steps))) + 1
    b = np.concatenate([b[cut:], b[:cut]])
    parent, children = _decode_preorder((k - 1) * b)
    groups: list[list[list[int]]] = []
    for w in range(m):
        ch = children[w]
        groups.append([ch[i : i + k - 1] for i in range(0, len(ch), k - 1)])
    labels = np.zeros(m, dtype=np.int64)
    for w in range(m):
        for grp in groups[w]:
            delta = _uniform_composition(k, k, rng) - 1
            cur = int(labels[w])
            for j, u in enumerate(grp):
                cur += int(delta[j])
                labels[u] = cur
    return Mobile(k=k, groups=groups, labels=labels)


def _white_corner_contour(groups: list[list[list[int]]]) -> np.ndarray:
    """White corner sequence of the mobile contour (one slot per white-vertex degree)."""
    corners: list[int] = []
    stack: list[tuple[str, int]] = [("enter", 0)]
    while stack:
        kind, w = stack.pop()
        corners.append(w)
        if kind == "corner":
            continue
        todo: list[tuple[str, int]] = []
        for grp in groups[w]:
            for u in grp:
                todo.append(("enter", u))
            todo.append(("corner", w))
        stack.extend(reversed(todo))
    return np.asarray(corners[:-1] if len(corners) > 1 else corners, dtype=np.int64)


def sample_2k_angulation_with_mobile(n: int, k: int, seed: int) -> MapSample:
    """Uniform rooted 2k-angulation with n faces via the mobile bijection."""
    if n < 1:
        raise ValueError("need n >= 1")
    if k < 2:
        raise ValueError(f"2k-angulations need k >= 2, got k={k}")
    rng = np.random.default_rng((int(seed), 0xB0B1))
    mob = sample_mobile(n, k, rng)
    corner_vertex = _white_corner_contour(mob.groups)
    corner_label = mob.labels[corner_vertex]
    epsilon = int(rng.integers(0, 2))
    n_white = mob.labels.size
    pm = map_from_corners(corner_vertex, corner_label, n_white, k, n, epsilon)
    parent = np.full(n_white, -1, dtype=np.int64)
    for w, grps in enumerate(mob.groups):
        for grp in grps:
            for u in grp:
                parent[u] = w
    labels = np.concatenate([mob.labels, [mob.labels.min() - 1]])
    return MapSample(
        map=pm,
        tree=LabeledTree(parent=parent, labels=mob.labels),
        labels=labels,
        origin=n_white,
        epsilon=epsilon,
    )


def sample_2k_angulation(n: int, k: int, seed: int) -> PlanarMap:
    return sample_2k_angulation_with_mobile(n, k, seed).map


# ---------------------------------------------------------------------------
# audits and traversals


def map_faces(m: PlanarMap) -> list[np.ndarray]:
    """Face orbits of h -> next_he[opp[h]], one array of half-edges per face."""
    perm = m.next_he[m.opp]
    seen = np.zeros(m.n_half_edges, dtype=bool)
    faces = []
    for h0 in range(m.n_half_edges):
        if seen[h0]:
            continue
        orbit = []
        h = h0
        while not seen[h]:
            seen[h] = True
            orbit.append(h)
            h = int(perm[h])
        faces.append(np.asarray(orbit, dtype=np.int64))
    return faces


@dataclass(frozen=True)
class MapAudit:
    rotation_ok: bool
    involution_ok: bool
    connected: bool
    vertex_count_ok: bool
    euler_ok: bool
    face_degrees_ok: bool
    bipartite_ok: bool

    @property
    def ok(self) -> bool:
        return all(
            (
                self.rotation_ok,
                self.involution_ok,
                self.connected,
                self.vertex_count_ok,
                self.euler_ok,
                self.face_degrees_ok,
                self.bipartite_ok,
            )
        )


def validate_map(m: PlanarMap) -> MapAudit:
    """Full structural audit: permutations, connectivity, Euler, degrees, parity."""
    h = m.n_half_edges
    rotation_ok = bool(np.array_equal(np.sort(m.next_he), np.arange(h))) and bool(
        np.all(m.vertex_of[m.next_he] == m.vertex_of)
    )
    involution_ok = bool(np.all(m.opp[m.opp] == np.arange(h)) and np.all(m.opp != np.arange(h)))
    dist = bfs_distances(m, int(m.vertex_of[m.root]))
    connected = bool(np.all(dist >= 0))
    v = m.n_vertices
    vertex_count_ok = v == (m.k - 1) * m.n_faces + 2
    faces = map_faces(m)
    euler_ok = v - m.n_edges + len(faces) == 2 and len(faces) == m.n_faces
    face_degrees_ok = all(f.size == 2 * m.k for f in faces)
    # bipartite: BFS layers must 2-color the graph
    indptr, indices = m.csr()
    src = np.repeat(np.arange(v), np.diff(indptr))
    bipartite_ok = bool(np.all((dist[src] - dist[indices]) % 2 == 1)) if connected else False
    return MapAudit(
        rotation_ok=rotation_ok,
        involution_ok=involution_ok,
        connected=connected,
        vertex_count_ok=vertex_count_ok,
        euler_ok=euler_ok,
        face_degrees_ok=face_degrees_ok,
        bipartite_ok=bipartite_ok,
    )


def _gather_neighbors(indptr: np.ndarray, indices: np.ndarray, frontier: np.ndarray) -> np.ndarray:
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.asarray([], dtype=np.int64)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return indices[np.repeat(starts, counts) + offs]


def bfs_distances(m: PlanarMap, source: int, blocked: np.ndarray | None = None) -> np.ndarray:
    """Exact BFS layers from a vertex; -1 marks unreachable (or blocked) vertices."""
    indptr, indices = m.csr()
    v = m.n_vertices
    dist = np.full(v, -1, dtype=np.int64)
    if blocked is not None and blocked[source]:
        return dist
    dist[source] = 0
    frontier = np.asarray([source], dtype=np.int64)
    d = 0
    while frontier.size:
        d += 1
        nbrs = _gather_neighbors(indptr, indices, frontier)
        if nbrs.size == 0:
            break
        fresh = dist[nbrs] < 0
        if blocked is not None:
            fresh &= ~blocked[nbrs]
        frontier = np.unique(nbrs[fresh])
        dist[frontier] = d
    return dist


def cvs_distance_audit(sample: MapSample) -> tuple[bool, int | None]:
    """BFS distance from the added origin must equal label - min(label) + 1.

    Exact for every vertex; returns (ok, witness vertex or None).  This is the
    strongest single correctness oracle for the sampler: it exercises the
    bijection's defining distance identity on the whole map.
    """
    dist = bfs_distances(sample.map, sample.origin)
    tree_labels = sample.tree.labels
    expect = tree_labels - tree_labels.min() + 1
    got = dist[: sample.origin]
    bad = np.nonzero(got != expect)[0]
    if bad.size:
        return False, int(bad[0])
    if dist[sample.origin] != 0:
        return False, int(sample.origin)
    return True, None


@dataclass(frozen=True)
class BallGrowth:
    radii: np.ndarray
    counts: np.ndarray
    exponent: float


def ball_growth_profile(m: PlanarMap, center: int, radii=None) -> BallGrowth:
    """Ball volumes |B_r| from one BFS and the log-log growth exponent.

    Default radii span [n^(1/8), n^(1/4)] (clipped to the eccentricity), the
    window where the four-dimensional growth of large uniform quadrangulations
    shows at finite n.
    """
    dist = bfs_distances(m, center)
    ecc = int(dist.max())
    sizes = np.cumsum(np.bincount(dist[dist >= 0], minlength=ecc + 1))
    if radii is None:
        rlo = max(1, int(round(m.n_faces**0.125)))
        rhi = max(rlo + 1, int(round(m.n_faces**0.25)))
        radii = np.arange(rlo, min(rhi, ecc) + 1)
    radii = np.asarray(radii, dtype=np.int64)
    if radii.size == 0:
        raise ValueError("no radii within eccentricity")
    counts = sizes[np.minimum(radii, ecc)]
    if radii.size >= 2:
        x = np.log(radii.astype(np.float64))
        y = np.log(counts.astype(np.float64))
        xm, ym = x.mean(), y.mean()
        exponent = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    else:
        exponent = float("nan")
    return BallGrowth(radii=radii, counts=counts, exponent=exponent)


# ---------------------------------------------------------------------------
# bottleneck scan


@dataclass(frozen=True)
class Finding:
    cycle: tuple[int, ...]
    side_diameters: tuple[int, ...]
    side_sizes: tuple[int, ...]


@dataclass(frozen=True)
class BottleneckReport:
    findings: list[Finding]
    n_cycles: int
    threshold: float


def _canon_cycle(seq: tuple[int, ...]) -> tuple[int, ...]:
    length = len(seq)
    if length == 4:
        # rotation+reflection orbit of a 4-cycle: min vertex first, then its
        # smaller neighbor, the opposite vertex, the larger neighbor
        i = seq.index(min(seq))
        a, b, c, d = seq[i], seq[(i + 1) % 4], seq[(i + 2) % 4], seq[(i + 3) % 4]
        return (a, b, c, d) if b <= d else (a, d, c, b)
    best = None
    for d in (1, -1):
        for r in range(length):
            cand = tuple(seq[(r + d * i) % length] for i in range(length))
            if best is None or cand < best:
                best = cand
    return best


def _parallel_pair_cycles(m: PlanarMap) -> list[tuple[int, ...]]:
    halves = np.arange(m.n_half_edges)
    first = halves < m.opp
    u = m.vertex_of[halves[first]]
    v = m.vertex_of[m.opp[halves[first]]]
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    keys = lo * m.n_vertices + hi
    uniq, counts = np.unique(keys, return_counts=True)
    dup = uniq[counts >= 2]
    return list(zip((dup // m.n_vertices).tolist(), (dup % m.n_vertices).tolist()))


def _wedge_four_cycles(m: PlanarMap, adj: list) -> list[tuple[int, ...]]:
    # all wedges x - c - y with x < y from the deduplicated sorted adjacency,
    # built per neighbor-gap so everything stays vectorized
    deg = np.asarray([len(a) for a in adj], dtype=np.int64)
    flat = np.asarray([w for a in adj for w in a], dtype=np.int64)
    offs = np.concatenate([[0], np.cumsum(deg)])
    xs_parts, ys_parts, cs_parts = [], [], []
    max_deg = int(deg.max()) if deg.size else 0
    for gap in range(1, max_deg):
        sel = np.nonzero(deg > gap)[0]
        if sel.size == 0:
            break
        lengths = deg[sel] - gap
        total = int(lengths.sum())
        starts = offs[sel]
        within = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        base = np.repeat(starts, lengths) + within
        xs_parts.append(flat[base])
        ys_parts.append(flat[base + gap])
        cs_parts.append(np.repeat(sel, lengths))
    if not xs_parts:
        return []
    xs_a = np.concatenate(xs_parts)
    ys_a = np.concatenate(ys_parts)
    cs_a = np.concatenate(cs_parts)
    keys = xs_a * m.n_vertices + ys_a
    order = np.argsort(keys, kind="stable")
    keys_s = keys[order]
    cs_s = cs_a[order]
    bounds = np.concatenate([[0], np.nonzero(np.diff(keys_s))[0] + 1, [keys_s.size]])
    sizes = np.diff(bounds)
    multi = np.nonzero(sizes >= 2)[0]
    keys_list = keys_s.tolist()
    cs_list = cs_s.tolist()
    v_count = m.n_vertices
    cycles = []
    for gi in multi.tolist():
        start, end = int(bounds[gi]), int(bounds[gi + 1])
        key = keys_list[start]
        x, y = key // v_count, key % v_count
        group = cs_list[start:end]
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                cycles.append((x, group[a], y, group[b]))
    return cycles


def _dfs_cycles(m: PlanarMap, lmax: int) -> list[tuple[int, ...]]:
    """All injective cycles of length 3..lmax by canonical DFS; small maps only."""
    indptr, indices = m.csr()
    adj = [sorted(set(map(int, indices[indptr[v] : indptr[v + 1]]))) for v in range(m.n_vertices)]
    cycles = []

    def extend(base: int, path: list[int], on_path: set[int]):
        tail = path[-1]
        for w in adj[tail]:
            if w == base and len(path) >= 3:
                if path[1] < path[-1]:
                    cycles.append(tuple(path))
            elif w > base and w not in on_path and len(path) < lmax:
                path.append(w)
                on_path.add(w)
                extend(base, path, on_path)
                on_path.discard(w)
                path.pop()

    for base in range(m.n_vertices):
        extend(base, [base], {base})
    return cycles


def _local_double_sweep(adj: list, component: list[int], blocked: set) -> int:
    """Double-sweep diameter lower bound inside a small fully-known component."""
    comp = set(component)

    def far_bfs(start: int) -> tuple[int, int]:
        dist = {start: 0}
        q = deque([start])
        last, dmax = start, 0
        while q:
            v = q.popleft()
            dv = dist[v]
            for w in adj[v]:
                if w in comp and w not in dist:
                    dist[w] = dv + 1
                    if dv + 1 > dmax:
                        dmax, last = dv + 1, w
                    q.append(w)
        return last, dmax

    far, _ = far_bfs(component[0])
    _, diam = far_bfs(far)
    return diam


def _bounded_depth_bfs(adj: list, start: int, blocked: set, depth_cap: int):
    """BFS from ``start`` avoiding ``blocked``, stopping once ``depth_cap`` is hit.

    Returns (reached_depth, members or None): members is the full component
    when the frontier exhausted before the cap, else None (the component goes
    at least ``depth_cap`` deep, which already lower-bounds its diameter).
    """
    dist = {start: 0}
    q = deque([start])
    deepest = 0
    while q:
        v = q.popleft()
        dv = dist[v]
        if dv >= depth_cap:
            return dv, None
        for w in adj[v]:
            if w not in blocked and w not in dist:
                dist[w] = dv + 1
                if dv + 1 > deepest:
                    deepest = dv + 1
                    if deepest >= depth_cap:
                        return deepest, None
                q.append(w)
    return deepest, list(dist)


def _component_sides(
    m: PlanarMap,
    adj: list,
    cyc_vertices: tuple[int, ...],
    threshold: float,
    far_pair: tuple[int, int, int] | None = None,
    f_cap: int | None = None,
):
    """Diameter lower bounds of the components of the map minus the cycle vertices.

    A round-robin multi-seed exploration with per-group size caps rejects the
    overwhelmingly common single-component case after a handful of steps.
    Fully-explored small components get an exact local double sweep.  Capped
    (large) groups qualify cheaply: when exactly one group is capped, its
    component is the complement of the cycle and the completed components, so a
    precomputed far vertex pair (u, v, d) with map distance d >= threshold
    certifies its diameter whenever both endpoints lie in it (map distance
    lower-bounds component distance); otherwise a depth-bounded BFS is run,
    since reaching depth t from a seed already certifies diameter >= t.  Only
    the rare case of several capped qualifying groups pays for full restricted
    BFS to tell whether they are really distinct components.  Returns a list of
    (diam_lb, size) for the qualifying sides (-1 when the size was not
    resolved), or None when a finding is impossible.
    """
    if f_cap is None:
        f_cap = 512 + 16 * int(np.ceil(threshold))
    depth_cap = int(np.ceil(threshold))
    blocked_set = set(cyc_vertices)
    seeds = []
    for v in cyc_vertices:
        for w in adj[v]:
            if w not in blocked_set:
                blocked_set.add(w)  # reuse as dedup; removed below
                seeds.append(w)
    for w in seeds:
        blocked_set.discard(w)
    if len(seeds) < 2:
        return None

    # sequential capped component discovery: explore one group at a time and
    # stop as soon as all seeds sit in one group (the single-component case,
    # which dominates and exits after a handful of steps).  A group is "open"
    # when its exploration was cut by the cap; closed groups are exact
    # components.  Later groups can only ever collide with open ones.
    owner: dict[int, int] = {}
    redirect: list[int] = []
    group_members: list[list[int]] = []
    group_open: list[bool] = []

    def find(g: int) -> int:
        while redirect[g] != g:
            redirect[g] = redirect[redirect[g]]
            g = redirect[g]
        return g

    unseen = set(seeds)
    n_alive = 0
    first = True
    while unseen:
        s = unseen.pop()
        if s in owner:
            continue
        g = len(redirect)
        redirect.append(g)
        group_members.append([s])
        group_open.append(False)
        n_alive += 1
        owner[s] = g
        cap = 48 if first else f_cap
        first = False
        q = [s]
        qi = 0
        members = group_members[g]
        while qi < len(q):
            v = q[qi]
            qi += 1
            for w in adj[v]:
                if w in blocked_set:
                    continue
                o = owner.get(w)
                if o is None:
                    owner[w] = g
                    members.append(w)
                    q.append(w)
                    unseen.discard(w)
                else:
                    ro = find(o)
                    if ro != g:
                        # collision with an earlier (necessarily open) group
                        redirect[ro] = g
                        members.extend(group_members[ro])
                        group_members[ro] = []
                        group_open[g] = group_open[g] or group_open[ro]
                        n_alive -= 1
            if not unseen and n_alive == 1:
                return None
            if len(members) >= cap:
                group_open[g] = True
                break
        if group_open[g] and not unseen and n_alive == 1:
            return None
        if qi < len(q) and not group_open[g]:
            group_open[g] = True  # stopped early for any other reason
    if n_alive < 2:
        return None

    roots = [g for g in range(len(redirect)) if find(g) == g and group_members[g]]
    # a component can reach diameter >= threshold only with > threshold vertices
    big = [g for g in roots if group_open[g] or len(group_members[g]) > threshold]
    if len(big) < 2:
        return None

    completed_q = []  # (diam, size) of fully-known qualifying components
    open_roots = []
    for g in big:
        if group_open[g]:
            open_roots.append(g)
        else:
            diam = _local_double_sweep(adj, group_members[g], blocked_set)
            if diam >= threshold:
                completed_q.append((diam, len(group_members[g])))
    if len(completed_q) + len(open_roots) < 2:
        return None
    if len(completed_q) >= 2:
        return completed_q

    if len(open_roots) == 1 and far_pair is not None:
        # the single open component is everything outside the cycle and the
        # closed components; test the certificate pair for membership
        u, v, dmap = far_pair
        if dmap >= threshold and u not in blocked_set and v not in blocked_set:
            closed_vertices = {w for g in roots if not group_open[g] for w in group_members[g]}
            if u not in closed_vertices and v not in closed_vertices:
                sides = completed_q + [(dmap, -1)]
                return sides if len(sides) >= 2 else None
        # fall through to the bounded BFS when the certificate does not apply

    qualifying_open = []  # (diam, size, exact?, rep)
    for g in open_roots:
        rep = group_members[g][0]
        depth, comp = _bounded_depth_bfs(adj, rep, blocked_set, depth_cap)
        if comp is None:
            qualifying_open.append((depth, -1, False, rep))
        elif len(comp) > threshold:
            diam = _local_double_sweep(adj, comp, blocked_set)
            if diam >= threshold:
                qualifying_open.append((diam, len(comp), True, rep))
    if len(completed_q) + len(qualifying_open) < 2:
        return None

    unresolved = [q for q in qualifying_open if not q[2]]
    if len(unresolved) >= 2:
        # several open groups might be one component; resolve exactly
        blocked_mask = np.zeros(m.n_vertices, dtype=bool)
        blocked_mask[list(cyc_vertices)] = True
        resolved = []
        while unresolved:
            _, _, _, rep = unresolved.pop()
            dist = bfs_distances(m, rep, blocked=blocked_mask)
            comp = np.nonzero(dist >= 0)[0]
            far = int(comp[int(np.argmax(dist[comp]))])
            dist2 = bfs_distances(m, far, blocked=blocked_mask)
            if dist2.max() >= threshold:
                resolved.append((int(dist2.max()), int(comp.size)))
            inside = dist >= 0
            unresolved = [q for q in unresolved if not inside[q[3]]]
        sides = completed_q + [(d, s) for d, s, ok, _ in qualifying_open if ok] + resolved
    else:
        sides = completed_q + [(d, s) for d, s, _, _ in qualifying_open]
    return sides if len(sides) >= 2 else None


def bottleneck_scan(m: PlanarMap, delta: float, lmax: int, first_only: bool = False) -> BottleneckReport:
    """Find short injective cycles both of whose sides are metrically large.

    Enumerates injective cycles of length <= lmax (parallel-edge 2-cycles and
    wedge-pair 4-cycles for lmax <= 5; pruned DFS beyond, which is only
    practical on small maps), drops exact face boundaries (one of their sides
    is a face interior, empty of vertices), and reports cycles for which at
    least two components of the map minus the cycle's vertices have double-sweep
    diameter lower bound >= delta * n_faces^(1/4).  Side diameters are measured
    inside the components, so the bound is conservative for the separation
    statement.  With ``first_only`` the scan stops at the first finding, which
    is all the nonempty-findings frequency statistic needs.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if lmax > 8:
        raise ValueError("cycle enumeration is exponential beyond lmax = 8")
    threshold = delta * m.n_faces**0.25
    indptr, indices = m.csr()
    adj = [sorted(set(map(int, indices[indptr[v] : indptr[v + 1]]))) for v in range(m.n_vertices)]

    cycles: list[tuple[int, ...]] = []
    if lmax >= 2:
        cycles.extend(_parallel_pair_cycles(m))
    if lmax >= 6:
        cycles.extend(_dfs_cycles(m, lmax))
    elif lmax >= 4:
        cycles.extend(_wedge_four_cycles(m, adj))

    face_keys = set()
    for f in map_faces(m):
        vseq = tuple(int(m.vertex_of[h]) for h in f)
        if len(set(vseq)) == len(vseq):
            face_keys.add(_canon_cycle(vseq))

    by_vertex_set: dict[frozenset, list[tuple[int, ...]]] = {}
    n_cycles = 0
    seen_canon = set()
    for cyc in cycles:
        canon = _canon_cycle(cyc)
        if canon in seen_canon:
            continue
        seen_canon.add(canon)
        n_cycles += 1
        if canon in face_keys:
            continue
        by_vertex_set.setdefault(frozenset(cyc), []).append(cyc)

    # global far pair: map distance lower-bounds any component distance
    d0 = bfs_distances(m, int(m.vertex_of[m.root]))
    u_far = int(np.argmax(d0))
    d1 = bfs_distances(m, u_far)
    v_far = int(np.argmax(d1))
    far_pair = (u_far, v_far, int(d1[v_far]))

    findings = []
    for vset, reps in by_vertex_set.items():
        sides = _component_sides(m, adj, tuple(vset), threshold, far_pair=far_pair)
        if sides is None:
            continue
        good = sorted([s for s in sides if s[0] >= threshold], reverse=True)
        if len(good) >= 2:
            for cyc in reps:
                findings.append(
                    Finding(
                        cycle=cyc,
                        side_diameters=tuple(d for d, _ in good),
                        side_sizes=tuple(sz for _, sz in good),
                    )
                )
            if first_only:
                break
    return BottleneckReport(findings=findings, n_cycles=n_cycles, threshold=threshold)


# ---------------------------------------------------------------------------
# hand-built positive control and serialization


def build_tube_map(rings: int) -> PlanarMap:
    """Square tube quadrangulation: rings of 4 vertices capped at both ends.

    Every interior ring is a genuine 4-cycle bottleneck separating two long
    halves, which makes this the planted positive control for the scan.
    Faces: 4 * rings lateral quads plus two caps.
    """
    if rings < 1:
        raise ValueError("need at least one ring of faces")
    levels = rings + 1

    def vid(i: int, j: int) -> int:
        return 4 * i + (j % 4)

    rotations: list[list[int]] = []
    for i in range(levels):
        for j in range(4):
            east = vid(i, j + 1)
            west = vid(i, j - 1)
            if i == 0:
                rotations.append([east, vid(1, j), west])
            elif i == levels - 1:
                rotations.append([east, west, vid(i - 1, j)])
            else:
                rotations.append([east, vid(i + 1, j), west, vid(i - 1, j)])

    half_of: dict[tuple[int, int], list[int]] = {}
    n_half = sum(len(r) for r in rotations)
    vertex_of = np.empty(n_half, dtype=np.int64)
    next_he = np.empty(n_half, dtype=np.int64)
    opp = np.full(n_half, -1, dtype=np.int64)
    h = 0
    for v, rot in enumerate(rotations):
        ids = []
        for w in rot:
            vertex_of[h] = v
            half_of.setdefault((v, w), []).append(h)
            ids.append(h)
            h += 1
        for a, b in zip(ids, ids[1:] + ids[:1]):
            next_he[a] = b
    for (v, w), halves in half_of.items():
        if v < w:
            partners = half_of[(w, v)]
            for ha, hb in zip(halves, reversed(partners)):
                opp[ha] = hb
                opp[hb] = ha
    return PlanarMap(
        k=2,
        n_faces=4 * rings + 2,
        next_he=next_he,
        opp=opp,
        vertex_of=vertex_of,
        root=0,
    )


def canonical_form(m: PlanarMap) -> tuple:
    """Root-preserving canonical encoding; equal iff the rooted maps are equal."""
    h_count = m.n_half_edges
    lab = np.full(h_count, -1, dtype=np.int64)
    order = [int(m.root)]
    lab[m.root] = 0
    i = 0
    while i < len(order):
        h = order[i]
        i += 1
        for g in (int(m.next_he[h]), int(m.opp[h])):
            if lab[g] < 0:
                lab[g] = len(order)
                order.append(g)
    return tuple((int(lab[m.next_he[h]]), int(lab[m.opp[h]])) for h in order)


def map_to_json(m: PlanarMap, config: dict | None = None) -> str:
    doc = {
        "format_version": 1,
        "config": config or {},
        "k": int(m.k),
        "n_faces": int(m.n_faces),
        "root": int(m.root),
        "next": [int(x) for x in m.next_he],
        "opp": [int(x) for x in m.opp],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def map_from_json(text: str) -> PlanarMap:
    doc = json.loads(text)
    next_he = np.asarray(doc["next"], dtype=np.int64)
    opp = np.asarray(doc["opp"], dtype=np.int64)
    h = next_he.size
    if opp.size != h or h % 2:
        raise ValueError("half-edge arrays malformed")
    if not np.all(opp[opp] == np.arange(h)):
        raise ValueError("opp is not an involution")
    if not np.array_equal(np.sort(next_he), np.arange(h)):
        raise ValueError("next is not a permutation")
    vertex_of = np.full(h, -1, dtype=np.int64)
    vid = 0
    for h0 in range(h):
        if vertex_of[h0] >= 0:
            continue
        cur = h0
        while vertex_of[cur] < 0:
            vertex_of[cur] = vid
            cur = int(next_he[cur])
        vid += 1
    m = PlanarMap(
        k=int(doc["k"]),
        n_faces=int(doc["n_faces"]),
        next_he=next_he,
        opp=opp,
        vertex_of=vertex_of,
        root=int(doc["root"]),
    )
    return m
