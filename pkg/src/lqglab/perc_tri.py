"""Sewing bijection from Kreweras-step quadrant walks to site-percolated
disk triangulations, plus Boltzmann sampling.

The construction fills a fixed (l+2)-gon from inside.  The unfilled region
keeps a boundary of the form [root edge | B-arc | active edge | A-arc]
whose arc lengths track the walk coordinates.  A (0,1) step glues a
triangle on the active edge whose apex is a new vertex and grows the
A-arc; (1,0) does the same growing the B-arc; (-1,-1) zips the active
edge onto one of its two neighboring arc edges, saturating their shared
vertex (it leaves the frontier for good) and merging the two far
endpoints into one vertex; the freed spot is filled by promoting the
other arc's innermost edge to active.  When the walk ends the last
active edge is identified with the root edge, closing the disk.

Two conventions make this a bijection onto percolated triangulations and
both are pinned here after exhaustive search:

* a zip always consumes the arc edge that was created *earlier* and
  promotes the newer one (the LIFO bracket-matching discipline);
* colors are assigned at saturation time: a vertex folded over by an
  A-side zip turns yellow, by a B-side zip blue; vertices merged into the
  boundary inherit blue.

With these choices every walk sews to a valid type II triangulation,
distinct walks give distinct colored maps, and each map shape is hit by
exactly its 2^(interior) colorings — the test suite checks all three
facts exhaustively at small sizes.
"""

from __future__ import annotations

import numpy as np

from .planar_map import (PlanarMap, DiskTriangulation, SiteColoring, MapError,
                         canonical_code, canonical_vertex_order, BLUE, YELLOW)
from .walks import LatticeWalk, KREWERAS, WalkError

A_STEP, B_STEP, C_STEP = 0, 1, 2
FOLD_COLOR_A_SIDE, FOLD_COLOR_B_SIDE = YELLOW, BLUE  # color given on saturation


class PercolatedTriangulation:
    """Type II disk triangulation with a blue-boundary site coloring."""

    __slots__ = ("tri", "coloring")

    def __init__(self, tri: DiskTriangulation, coloring: SiteColoring):
        SiteColoring.check_blue_boundary(tri, coloring)
        if len(coloring.colors) != tri.map.n_vertices:
            raise MapError("invalid id: coloring size mismatch")
        self.tri = tri
        self.coloring = coloring

    def __repr__(self):
        return (f"PercolatedTriangulation(perimeter={self.tri.perimeter}, "
                f"V={self.tri.map.n_vertices})")


def sew_walk_to_percolated(w: LatticeWalk, ell: int) -> PercolatedTriangulation:
    """Sew a quadrant walk (ell,0)->(0,0) into a percolated triangulation."""
    if w.step_set.name != "kreweras":
        raise WalkError("walk must use the Kreweras step set")
    if ell < 0:
        raise WalkError("perimeter parameter must be >= 0")
    if tuple(w.start) != (ell, 0):
        raise WalkError(f"walk must start at ({ell},0)")
    w.check_excursion((0, 0))
    if len(w) == 0:
        raise WalkError("empty walk: the degenerate 2-gon is rejected")

    n_tri = int(np.sum(w.steps != C_STEP))
    np_he = 2 * (ell + 2) + 4 * n_tri  # polygon sides + triangle sides
    twin = np.full(np_he, -1, dtype=np.int64)
    fnext = np.full(np_he, -1, dtype=np.int64)
    origin = np.full(np_he, -1, dtype=np.int64)
    bnext = np.full(np_he, -1, dtype=np.int64)
    bprev = np.full(np_he, -1, dtype=np.int64)
    ctime = np.zeros(np_he, dtype=np.int64)  # creation step of exposed sides
    alive = np.ones(np_he, dtype=bool)

    n_poly = ell + 2
    UNSET = -1
    colors = [BLUE] * n_poly  # apex colors stay unset until a fold fixes them
    parent = list(range(n_poly))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return parent[x]

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx == ry:
            raise WalkError("sewing produced a self-identification (invalid walk)")
        if rx < n_poly and ry < n_poly:
            raise WalkError("sewing pinched the boundary polygon (invalid walk)")
        if colors[rx] != UNSET and colors[ry] != UNSET and colors[rx] != colors[ry]:
            raise WalkError("sewing merged two saturated vertices (invalid walk)")
        if ry < rx:
            rx, ry = ry, rx
        if colors[rx] == UNSET:
            colors[rx] = colors[ry]
        parent[ry] = rx

    def fold(v, side_color):
        r = find(v)
        if r >= n_poly:
            if colors[r] != UNSET:
                raise WalkError("sewing folded a vertex twice (invalid walk)")
            colors[r] = side_color

    n_he = 0

    def new_pair(o1, o2):
        nonlocal n_he
        a, b = n_he, n_he + 1
        n_he += 2
        twin[a], twin[b] = b, a
        origin[a], origin[b] = o1, o2
        return a, b

    def blink(a, b):
        bnext[a] = b
        bprev[b] = a

    # polygon: vertices P_0..P_{l+1}; edge i has outer side 2i (P_i -> P_{i+1
    # mod}) and exposed inner side 2i+1; edge n_poly-1 is the root edge R.
    for i in range(n_poly):
        a, b = new_pair(i, (i + 1) % n_poly)
        fnext[a] = 2 * ((i + 1) % n_poly)  # outer face cycle
    # inner exposure runs against the outer orientation: side 2i+1 runs
    # P_{i+1} -> P_i; boundary cycle: R_in -> pi_{l+1}_in -> ... -> pi_1_in
    inner = [2 * i + 1 for i in range(n_poly)]
    for i in range(n_poly):
        blink(inner[(i + 1) % n_poly], inner[i])

    root_inner = inner[n_poly - 1]
    active = inner[0]  # pi_1 exposed side, running P_1 -> P_0

    for k, step in enumerate(w.steps, start=1):
        u, wv = int(origin[active]), int(origin[twin[active]])
        if step == A_STEP or step == B_STEP:
            v = len(colors)
            colors.append(UNSET)
            parent.append(v)
            x_in, x_out = new_pair(wv, v)   # side v->w exposed as x_out
            y_in, y_out = new_pair(v, u)    # side u->v exposed as y_out
            fnext[active], fnext[x_in], fnext[y_in] = x_in, y_in, active
            p, q = int(bprev[active]), int(bnext[active])
            blink(p, y_out)
            blink(y_out, x_out)
            blink(x_out, q)
            ctime[x_out] = ctime[y_out] = k
            active = y_out if step == A_STEP else x_out
        else:
            beta, alpha = int(bprev[active]), int(bnext[active])
            if beta == root_inner or alpha == root_inner:
                raise WalkError("walk leaves quadrant: no arc edge to zip")
            # zip onto the older arc edge, promote the newer one
            if ctime[beta] < ctime[alpha]:
                t = int(origin[beta])
                inner_e, inner_b = int(twin[active]), int(twin[beta])
                twin[inner_e], twin[inner_b] = inner_b, inner_e
                new_active = alpha
                blink(int(bprev[beta]), new_active)
                alive[active] = alive[beta] = False
                fold(u, FOLD_COLOR_B_SIDE)
                union(find(wv), find(t))
                active = new_active
            else:
                s = int(origin[twin[alpha]])
                inner_e, inner_a = int(twin[active]), int(twin[alpha])
                twin[inner_e], twin[inner_a] = inner_a, inner_e
                new_active = beta
                blink(new_active, int(bnext[alpha]))
                alive[active] = alive[alpha] = False
                fold(wv, FOLD_COLOR_A_SIDE)
                union(find(u), find(s))
                active = new_active

    # boundary is now [R_in, active]: identify the two edges
    if bnext[root_inner] != active or bnext[active] != root_inner:
        raise WalkError("sewing did not close to a 2-gon")
    outer_r = int(twin[root_inner])
    inner_e = int(twin[active])
    twin[outer_r], twin[inner_e] = inner_e, outer_r
    alive[root_inner] = alive[active] = False

    # compact half-edges, relabel merged vertices by smallest representative
    keep = alive[:n_he]
    relabel = -np.ones(n_he, dtype=np.int64)
    relabel[keep] = np.arange(keep.sum())
    twin2 = relabel[twin[:n_he][keep]]
    fnext2 = relabel[fnext[:n_he][keep]]
    reps = np.asarray([find(v) for v in range(len(colors))])
    uniq, dense = np.unique(reps, return_inverse=True)
    origin2 = dense[reps[origin[:n_he][keep]]]
    fprev2 = np.empty_like(fnext2)
    fprev2[fnext2] = np.arange(len(fnext2))
    nxt2 = twin2[fprev2]
    m = PlanarMap(twin2, nxt2, origin2, relabel[inner_e])
    tri = DiskTriangulation(m)
    if tri.perimeter != ell + 2:
        raise MapError(f"sewing produced perimeter {tri.perimeter}, wanted {ell + 2}")
    if m.n_faces - 1 != n_tri:
        raise MapError("sewing produced wrong triangle count")
    if any(colors[r] == UNSET for r in uniq):
        raise WalkError("sewing left an unsaturated vertex (invalid walk)")
    final_colors = np.asarray([colors[r] for r in uniq], dtype=np.int8)
    coloring = SiteColoring(final_colors, "monochromatic-blue")
    return PercolatedTriangulation(tri, coloring)


def colored_code(p: PercolatedTriangulation) -> bytes:
    """Canonical code of the rooted map extended with vertex colors."""
    m = p.tri.map
    base = canonical_code(m)
    verts = canonical_vertex_order(m)
    return base + b"|C" + bytes(int(p.coloring.colors[v]) for v in verts)


def interior_color_histogram(p: PercolatedTriangulation):
    """(blue, yellow) counts over interior vertices."""
    interior = p.tri.interior_vertices()
    c = p.coloring.colors
    blue = sum(1 for v in interior if c[v] == BLUE)
    return blue, len(interior) - blue


def sample_boltzmann_percolated(ell: int, rng, max_steps: int = 30_000_000):
    """Boltzmann-distributed percolated triangulation of an (ell+2)-gon.

    Draws a uniform-step Kreweras walk conditioned to be a quadrant
    excursion (ell,0)->(0,0), then sews.  The conditioning is exact: the
    walk decomposes at its visits to the origin into a first-passage piece
    and a geometric number of loops, each sampled by restart-on-exit
    rejection; a rejected continuation after a visit to the origin simply
    terminates the walk there.  The induced law on triangulations weights
    each map with n vertices proportionally to (2/27)^n.
    """
    if ell < 0:
        raise WalkError("perimeter parameter must be >= 0")
    budget = max_steps
    while budget > 0:
        steps, budget = _first_passage_attempt(ell, rng, budget)
        if steps is None:
            continue
        # extend with further loops at the origin until one fails
        while True:
            more, budget = _first_passage_attempt(0, rng, budget, min_len=1)
            if more is None:
                walk = LatticeWalk(KREWERAS, (ell, 0), np.asarray(steps, dtype=np.int64))
                return sew_walk_to_percolated(walk, ell)
            steps.extend(more)
    raise WalkError("rng exhaustion cap: Boltzmann sampler ran out of budget")


def _first_passage_attempt(ell: int, rng, budget: int, min_len: int = 0):
    """One iid-step run from (ell,0) until reaching (0,0) or exiting.

    Returns (steps or None, remaining budget); None means the run exited
    the quadrant and the whole attempt is rejected.
    """
    vecs = KREWERAS.steps
    x, y = ell, 0
    steps = []
    while budget > 0:
        i = int(rng.integers(0, 3))
        budget -= 1
        dx, dy = vecs[i]
        x += dx
        y += dy
        if x < 0 or y < 0:
            return None, budget
        steps.append(i)
        if x == 0 and y == 0 and len(steps) >= min_len:
            return steps, budget
    return None, 0


def exact_small_law(ell: int, max_len: int):
    """Exact Boltzmann law restricted to walks of length <= max_len.

    Returns dict colored_code -> probability mass (unnormalized weights
    (1/3)^len), plus the map from code to a representative triangulation.
    Used as the enumeration oracle for sampler tests.
    """
    from .walks import enumerate_excursions

    masses = {}
    reps = {}
    for length in range(1, max_len + 1):
        try:
            walks = enumerate_excursions(KREWERAS, length, (ell, 0), (0, 0))
        except WalkError:
            continue
        for w in walks:
            p = sew_walk_to_percolated(w, ell)
            code = colored_code(p)
            masses[code] = masses.get(code, 0.0) + 3.0 ** (-length)
            reps[code] = p
    return masses, reps
