"""Crossing events on percolated disk triangulations and the embedding of
vertices into the triangle by normalized crossing probabilities.

The crossing event for a marked boundary edge asks for a simple path whose
endpoints sit on the two boundary arcs flanking the edge and whose other
vertices are blue interior vertices, with the query vertex on the edge's
side of the path.  Paths that use no interior vertex are excluded: they
always exist (the boundary is blue) and would make every probability one.

The fast implementation works cluster-by-cluster and is certified against
a brute-force simple-path oracle; both share the face-level flood fill
that decides which side of a separating set a vertex is on.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .planar_map import (DiskTriangulation, SiteColoring, MapError,
                         BLUE, bfs_distances, from_face_cycles)


class BoundaryArcs:
    """Three marked boundary edges and the arcs they cut out.

    Edges are given as edge ids lying on the outer face, in the cyclic
    order of the outer face walk (taken as the counterclockwise order).
    Arc (a,b) holds the boundary vertices strictly after a up to and
    including the near endpoint of b, so the three arcs partition the
    boundary vertex set.
    """

    __slots__ = ("tri", "edges", "arcs", "_cycle_vertices")

    def __init__(self, tri: DiskTriangulation, a: int, b: int, c: int):
        m = tri.map
        outer = tri.outer_face
        h0 = int(np.flatnonzero(m.face_of == outer)[0])
        cyc = m.face_cycle(h0)
        edge_pos = {}
        verts = []
        for pos, h in enumerate(cyc):
            edge_pos[m.edge_id(h)] = pos
            verts.append(int(m.origin[h]))
        for e in (a, b, c):
            if e not in edge_pos:
                raise MapError("invalid arcs: marked edge not on the outer face")
        if len({a, b, c}) != 3:
            raise MapError("invalid arcs: marked edges must be distinct")
        p = len(cyc)
        ia, ib, ic = edge_pos[a], edge_pos[b], edge_pos[c]
        # normalize to outer-walk order starting at a
        ordered = sorted([(ia, "a"), (ib, "b"), (ic, "c")])
        names = "".join(tag for _, tag in ordered)
        if names in ("abc", "bca", "cab"):
            order = {"a": ia, "b": ib, "c": ic}
        else:
            raise MapError("invalid arcs: edges must be in counterclockwise order a,b,c")

        def arc(i, j):
            out = []
            k = (i + 1) % p
            while True:
                out.append(verts[k])
                if k == j:
                    break
                k = (k + 1) % p
            return out

        self.tri = tri
        self.edges = (a, b, c)
        self.arcs = {
            ("a", "b"): arc(order["a"], order["b"]),
            ("b", "c"): arc(order["b"], order["c"]),
            ("c", "a"): arc(order["c"], order["a"]),
        }
        self._cycle_vertices = verts

    def rotated(self):
        """Arcs with the roles (a,b,c) -> (b,c,a); for equivariance tests."""
        a, b, c = self.edges
        return BoundaryArcs(self.tri, b, c, a)


class EmbeddedMap:
    """Vertex positions in the closed triangle with Monte-Carlo error bars."""

    __slots__ = ("positions", "stderr", "samples_used", "n_scale", "undefined")

    def __init__(self, positions, stderr, samples_used, n_scale, undefined):
        self.positions = np.asarray(positions, dtype=np.float64)
        self.stderr = np.asarray(stderr, dtype=np.float64)
        self.samples_used = int(samples_used)
        self.n_scale = int(n_scale)
        self.undefined = np.asarray(undefined, dtype=bool)
        if np.any(self.stderr < 0):
            raise MapError("invalid id: negative standard error")
        ok = ~self.undefined
        s = self.positions[ok].sum(axis=1)
        if np.any(self.positions[ok] < -1e-12) or np.any(np.abs(s - 1.0) > 1e-9):
            raise MapError("invalid id: positions must be barycentric")


# -- structural helpers ------------------------------------------------------


def _face_structure(tri: DiskTriangulation):
    """(face_rep, face_adj) with face_adj[f] = [(neighbor face, shared edge)]."""
    m = tri.map
    n = m.n_half_edges
    face_rep = np.full(m.n_faces, -1, dtype=np.int64)
    face_rep[m.face_of[::-1]] = np.arange(n - 1, -1, -1)
    adj = [[] for _ in range(m.n_faces)]
    for h in range(n):
        g = int(m.twin[h])
        if h < g:
            f1, f2 = int(m.face_of[h]), int(m.face_of[g])
            adj[f1].append((f2, h))
            adj[f2].append((f1, h))
    return face_rep, adj


def _edge_face(tri: DiskTriangulation, e: int):
    """Inner face incident to boundary edge e."""
    m = tri.map
    f1, f2 = int(m.face_of[e]), int(m.face_of[m.twin[e]])
    return f2 if f1 == tri.outer_face else f1


def _interior_mask(tri: DiskTriangulation):
    mask = np.ones(tri.map.n_vertices, dtype=bool)
    mask[tri.boundary_vertices] = False
    return mask


def _blue_clusters(tri: DiskTriangulation, colors, interior):
    """Union-find clusters of interior blue vertices; returns label array."""
    m = tri.map
    label = np.full(m.n_vertices, -1, dtype=np.int64)
    live = interior & (np.asarray(colors) == BLUE)
    parent = np.arange(m.n_vertices)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return parent[x]

    for h in range(m.n_half_edges):
        g = int(m.twin[h])
        if h < g:
            u, v = int(m.origin[h]), int(m.origin[g])
            if live[u] and live[v]:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[rv] = ru
    for v in np.flatnonzero(live):
        label[v] = find(int(v))
    return label


class _EventContext:
    """Precomputed structure for fast repeated event evaluation.

    The crossing event for a marked edge holds at v iff v touches a face
    NOT reached by a face flood started at the far boundary arc and blocked
    by edges of the qualifying-cluster wall that a path could actually use.
    This reproduces the union over qualifying paths of the closed near side
    (certified against the path oracle on the small-map corpus).
    """

    def __init__(self, tri: DiskTriangulation, arcs: BoundaryArcs):
        m = tri.map
        self.tri = tri
        self.arcs = arcs
        self.interior = _interior_mask(tri)
        self.n_vertices = m.n_vertices
        org = m.origin
        dst = m.origin[m.twin]
        reps = np.flatnonzero(np.arange(m.n_half_edges) < m.twin)
        eu, ev = org[reps], dst[reps]
        both_int = self.interior[eu] & self.interior[ev]
        self.int_edges = np.stack([eu[both_int], ev[both_int]], axis=1)
        # face adjacency (excluding outer), flattened
        inner = []
        for h in reps:
            f1, f2 = int(m.face_of[h]), int(m.face_of[m.twin[h]])
            if f1 != tri.outer_face and f2 != tri.outer_face:
                inner.append((f1, f2, int(org[h]), int(dst[h])))
        self.fadj = [[] for _ in range(m.n_faces)]
        for f1, f2, u, v in inner:
            self.fadj[f1].append((f2, u, v))
            self.fadj[f2].append((f1, u, v))
        self.face_verts = [[] for _ in range(m.n_faces)]
        for h in range(m.n_half_edges):
            self.face_verts[int(m.face_of[h])].append(int(org[h]))
        arc_names = [(("c", "a"), ("a", "b"), ("b", "c")),
                     (("a", "b"), ("b", "c"), ("c", "a")),
                     (("b", "c"), ("c", "a"), ("a", "b"))]
        self.events = []
        for i in range(3):
            nfrom, nto, nfar = arc_names[i]
            from_mask = np.zeros(m.n_vertices, dtype=bool)
            from_mask[arcs.arcs[nfrom]] = True
            to_mask = np.zeros(m.n_vertices, dtype=bool)
            to_mask[arcs.arcs[nto]] = True
            far_set = set(arcs.arcs[nfar])
            anchors = sorted({int(m.face_of[h]) for h in range(m.n_half_edges)
                              if int(m.face_of[h]) != tri.outer_face
                              and int(org[h]) in far_set})
            # interior-vertex / arc-vertex contact edges
            contact = []
            for h in reps:
                u, v = int(org[h]), int(dst[h])
                for x, y in ((u, v), (v, u)):
                    if self.interior[x] and (from_mask[y] or to_mask[y]):
                        contact.append((x, y, bool(from_mask[y])))
            self.events.append((from_mask, to_mask, anchors, contact))

    def evaluate(self, colors):
        """(E_a, E_b, E_c) boolean arrays for one coloring."""
        interior = self.interior
        live = interior & (colors == BLUE)
        parent = np.arange(self.n_vertices)

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        for u, v in self.int_edges:
            if live[u] and live[v]:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[rv] = ru
        out = []
        for from_mask, to_mask, anchors, contact in self.events:
            touch_from, touch_to = set(), set()
            for x, y, is_from in contact:
                if live[x]:
                    (touch_from if is_from else touch_to).add(find(x))
            qualifying = touch_from & touch_to
            res = np.zeros(self.n_vertices, dtype=bool)
            if qualifying:
                wall = np.zeros(self.n_vertices, dtype=bool)
                for v in np.flatnonzero(live):
                    if find(int(v)) in qualifying:
                        wall[v] = True
                for x, y, _ in contact:
                    if wall[x]:
                        wall[y] = True
                far_face = np.zeros(len(self.fadj), dtype=bool)
                stack = list(anchors)
                for f in anchors:
                    far_face[f] = True
                while stack:
                    f = stack.pop()
                    for g, u, v in self.fadj[f]:
                        if far_face[g]:
                            continue
                        if wall[u] and wall[v] and (interior[u] or interior[v]):
                            continue
                        far_face[g] = True
                        stack.append(g)
                far_face[self.tri.outer_face] = True
                for f in np.flatnonzero(~far_face):
                    res[self.face_verts[f]] = True
            out.append(res)
        return out


def _event_side_all(tri: DiskTriangulation, colors, arc_from, arc_to,
                    arc_far, edge_x):
    """Boolean array for a single crossing event (builds a fresh context)."""
    arcs_obj = None
    # identify which rotation of the stored arcs this call uses
    ctx = _EventContext(tri, _arcs_from_triple(tri, arc_from, arc_to, arc_far))
    return ctx.evaluate(np.asarray(colors, dtype=np.int8))[0]


class _RawArcs:
    """Bare arc container for internal use."""

    def __init__(self, arcs_dict, edges):
        self.arcs = arcs_dict
        self.edges = edges


def _arcs_from_triple(tri, arc_from, arc_to, arc_far):
    return _RawArcs({("c", "a"): list(arc_from), ("a", "b"): list(arc_to),
                     ("b", "c"): list(arc_far)}, (None, None, None))


def event_Ea(tri: DiskTriangulation, coloring: SiteColoring, arcs: BoundaryArcs,
             v: int) -> bool:
    """Crossing event for the first marked edge at vertex v (fast route)."""
    ctx = _EventContext(tri, arcs)
    return bool(ctx.evaluate(np.asarray(coloring.colors, dtype=np.int8))[0][v])


def event_all_three(tri, colors, arcs):
    """(E_a, E_b, E_c) boolean arrays for one coloring."""
    ctx = _EventContext(tri, arcs)
    return ctx.evaluate(np.asarray(colors, dtype=np.int8))


# -- brute-force oracle ------------------------------------------------------


def event_Ea_oracle(tri: DiskTriangulation, coloring: SiteColoring,
                    arcs: BoundaryArcs):
    """Exhaustive simple-path oracle: union over qualifying paths of the
    closed edge-a side.  Exponential; only for maps of a dozen vertices."""
    m = tri.map
    colors = coloring.colors
    interior = _interior_mask(tri)
    # half-edge adjacency so parallel edges count as distinct path routes
    out_hes = [[] for _ in range(m.n_vertices)]
    for h in range(m.n_half_edges):
        out_hes[int(m.origin[h])].append(h)
    from_set = set(arcs.arcs[("c", "a")])
    to_set = set(arcs.arcs[("a", "b")])
    inner_blue = [bool(interior[v] and colors[v] == BLUE)
                  for v in range(m.n_vertices)]
    start_face = _edge_face(tri, arcs.edges[0])
    _, fadj = _face_structure(tri)
    result = np.zeros(m.n_vertices, dtype=bool)
    path_vertices = []
    path_edges = []
    on_path = np.zeros(m.n_vertices, dtype=bool)

    def register():
        pe = set(path_edges)
        seen = np.zeros(m.n_faces, dtype=bool)
        seen[start_face] = True
        q = deque([start_face])
        while q:
            f = q.popleft()
            for g, h in fadj[f]:
                if seen[g] or g == tri.outer_face or m.edge_id(h) in pe:
                    continue
                seen[g] = True
                q.append(g)
        for h in range(m.n_half_edges):
            if seen[m.face_of[h]]:
                result[m.origin[h]] = True
        for v in path_vertices:
            result[v] = True

    def dfs(v):
        for h in out_hes[v]:
            u = int(m.origin[m.twin[h]])
            if on_path[u]:
                continue
            if inner_blue[u]:
                on_path[u] = True
                path_vertices.append(u)
                path_edges.append(m.edge_id(h))
                dfs(u)
                path_edges.pop()
                path_vertices.pop()
                on_path[u] = False
            elif u in to_set and len(path_vertices) >= 2:
                on_path[u] = True
                path_vertices.append(u)
                path_edges.append(m.edge_id(h))
                register()
                path_edges.pop()
                path_vertices.pop()
                on_path[u] = False

    for s in sorted(from_set):
        on_path[s] = True
        path_vertices.append(s)
        dfs(s)
        path_vertices.pop()
        on_path[s] = False
    return result


# -- the embedding -----------------------------------------------------------


def cardy_smirnov_embed(tri: DiskTriangulation, arcs: BoundaryArcs, K: int,
                        rng) -> EmbeddedMap:
    """Monte Carlo embedding over K fresh uniform interior colorings."""
    if K < 1:
        raise MapError("invalid id: need K >= 1")
    m = tri.map
    ctx = _EventContext(tri, arcs)
    interior = _interior_mask(tri)
    idx_int = np.flatnonzero(interior)
    counts = np.zeros((m.n_vertices, 3), dtype=np.int64)
    colors = np.zeros(m.n_vertices, dtype=np.int8)
    for _ in range(K):
        colors[:] = BLUE
        colors[idx_int] = rng.integers(0, 2, size=len(idx_int))
        ea, eb, ec = ctx.evaluate(colors)
        counts[:, 0] += ea
        counts[:, 1] += eb
        counts[:, 2] += ec
    phat = counts / float(K)
    s = phat.sum(axis=1)
    undefined = s == 0
    s_safe = np.where(undefined, 1.0, s)
    pos = phat / s_safe[:, None]
    pos[undefined] = 1.0 / 3.0
    var = phat * (1.0 - phat) / K
    stderr = np.sqrt(var.sum(axis=1)) / s_safe
    return EmbeddedMap(pos, stderr, K, tri.perimeter ** 2, undefined)


def exact_embedding(tri: DiskTriangulation, arcs: BoundaryArcs) -> EmbeddedMap:
    """Exact embedding by enumerating all interior colorings (tiny maps)."""
    m = tri.map
    ctx = _EventContext(tri, arcs)
    interior = _interior_mask(tri)
    idx_int = np.flatnonzero(interior)
    k = len(idx_int)
    if k > 20:
        raise MapError("invalid id: exact embedding needs <= 20 interior vertices")
    tot = np.zeros((m.n_vertices, 3), dtype=np.float64)
    colors = np.zeros(m.n_vertices, dtype=np.int8)
    for bits in range(1 << k):
        colors[:] = BLUE
        for i in range(k):
            colors[idx_int[i]] = (bits >> i) & 1
        ea, eb, ec = ctx.evaluate(colors)
        tot[:, 0] += ea
        tot[:, 1] += eb
        tot[:, 2] += ec
    p = tot / (1 << k)
    s = p.sum(axis=1)
    undefined = s == 0
    s_safe = np.where(undefined, 1.0, s)
    pos = p / s_safe[:, None]
    pos[undefined] = 1.0 / 3.0
    return EmbeddedMap(pos, np.zeros(m.n_vertices), 1 << k,
                       tri.perimeter ** 2, undefined)


# -- measure and metric ------------------------------------------------------


def _bary_to_xy(p):
    """Project barycentric triples onto the plane of the equilateral triangle."""
    p = np.asarray(p, dtype=np.float64)
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    return p @ corners


def _point_in_polygon(pt, poly):
    x, y = pt
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xc:
                inside = not inside
    return inside


def area_measure(e: EmbeddedMap, polygon) -> float:
    """Mass n^{-1} per embedded vertex falling in the query polygon.

    `polygon` is a list of barycentric triples (vertices of a polygon in
    the triangle); an empty polygon has measure zero.
    """
    if len(polygon) == 0:
        return 0.0
    poly_xy = _bary_to_xy(polygon)
    pts = _bary_to_xy(e.positions)
    cnt = sum(1 for p in pts if _point_in_polygon(p, poly_xy))
    return cnt / e.n_scale


FULL_TRIANGLE = [(1.0 + 1e-9, -1e-9, -1e-9), (-1e-9, 1.0 + 1e-9, -1e-9),
                 (-1e-9, -1e-9, 1.0 + 1e-9)]


def nearest_vertex(e: EmbeddedMap, x) -> int:
    """Embedded vertex closest to the query point; ties -> smallest id."""
    pts = _bary_to_xy(e.positions)
    q = _bary_to_xy([x])[0]
    d = np.sum((pts - q) ** 2, axis=1)
    return int(np.argmin(d))  # argmin takes the first (smallest id) on ties


def rescaled_metric(e: EmbeddedMap, tri: DiskTriangulation, x, y) -> float:
    """n^{-1/4} times the graph distance between nearest embedded vertices."""
    if tri.map.n_vertices != len(e.positions):
        raise MapError("invalid id: embedding does not match triangulation")
    vx, vy = nearest_vertex(e, x), nearest_vertex(e, y)
    if vx == vy:
        return 0.0
    d = bfs_distances(tri.map, vx)[vy]
    return float(e.n_scale ** -0.25 * d)


# -- percolation interfaces --------------------------------------------------


def percolation_interfaces(tri: DiskTriangulation, coloring: SiteColoring):
    """Loops separating blue from yellow, as cyclic lists of crossed edge ids.

    Every triangle has zero or two bichromatic edges, so those edges link
    the triangles into disjoint cycles in the dual; the outer face never
    participates because the boundary is monochromatic.
    """
    m = tri.map
    colors = coloring.colors
    bi_edges = []
    bi_of_face = {}
    for h in range(m.n_half_edges):
        g = int(m.twin[h])
        if h < g and colors[m.origin[h]] != colors[m.origin[g]]:
            bi_edges.append(h)
            for f in (int(m.face_of[h]), int(m.face_of[g])):
                bi_of_face.setdefault(f, []).append(h)
    for f, lst in bi_of_face.items():
        if len(lst) != 2 or f == tri.outer_face:
            raise MapError("invalid id: interface degree must be two per face")
    loops = []
    used = set()
    for e0 in bi_edges:
        if e0 in used:
            continue
        loop = []
        e, f = e0, int(m.face_of[e0])
        while True:
            used.add(e)
            loop.append(e)
            e = next(x for x in bi_of_face[f] if x != e)
            f1, f2 = int(m.face_of[e]), int(m.face_of[m.twin[e]])
            f = f2 if f == f1 else f1
            if e == e0:
                break
        loops.append(loop)
    return loops


# -- lattice test fixture ----------------------------------------------------


def triangular_disk(m_side: int):
    """Triangular-lattice triangle with side m_side as a DiskTriangulation.

    Returns (tri, arcs, lattice_positions) where arcs marks the boundary
    edge just counterclockwise of each corner and lattice_positions[v] is
    the barycentric triple (i, j, m-i-j)/m.
    """
    m = m_side
    verts = {}
    for i in range(m + 1):
        for j in range(m + 1 - i):
            verts[(i, j)] = len(verts)

    cycles = []
    half = []
    # simple triangulation: no multi-edges, so direction pairs are unique
    dir_map = {}

    def add_face(corner_list):
        hs = []
        for t in range(3):
            u = corner_list[t]
            v = corner_list[(t + 1) % 3]
            idx = len(half)
            half.append((verts[u], verts[v]))
            dir_map[(verts[u], verts[v])] = idx
            hs.append(idx)
        cycles.append(hs)

    for i in range(m):
        for j in range(m - i):
            add_face([(i, j), (i + 1, j), (i, j + 1)])
            if i + j <= m - 2:
                add_face([(i + 1, j), (i + 1, j + 1), (i, j + 1)])

    # boundary: corner C=(0,0) -> A=(m,0) -> B=(0,m) -> C, walked so the
    # outer cycle is the reversal of the inner boundary orientation
    boundary = []
    for i in range(m):
        boundary.append(((i, 0), (i + 1, 0)))
    for j in range(m):
        boundary.append(((m - j, j), (m - j - 1, j + 1)))
    for j in range(m, 0, -1):
        boundary.append(((0, j), (0, j - 1)))
    outer_cycle = []
    for (u, v) in reversed(boundary):
        idx = len(half)
        half.append((verts[v], verts[u]))
        dir_map[(verts[v], verts[u])] = idx
        outer_cycle.append(idx)
    cycles.append(outer_cycle)

    n = len(half)
    twin = np.empty(n, dtype=np.int64)
    for (u, v), idx in dir_map.items():
        twin[idx] = dir_map[(v, u)]
    origins = np.asarray([u for u, _ in half], dtype=np.int64)
    root = dir_map[(verts[(0, 0)], verts[(1, 0)])]
    pmap = from_face_cycles(cycles, twin, root, origins)
    tri = DiskTriangulation(pmap)

    def bedge(u, v):
        return pmap.edge_id(dir_map[(verts[u], verts[v])])

    # the outer walk visits corners in the order (0,0), (0,m), (m,0); mark
    # the edge just after each corner so (a, b, c) flank those corners
    a = bedge((0, 0), (0, 1))
    b = bedge((0, m), (1, m - 1))
    c = bedge((m, 0), (m - 1, 0))
    arcs = BoundaryArcs(tri, a, b, c)
    # barycentric targets in (E_a, E_b, E_c) order: the coordinates toward
    # corners (0,0), (0,m), (m,0) are (m-i-j)/m, j/m, i/m
    pos = np.zeros((len(verts), 3))
    for (i, j), v in verts.items():
        pos[v] = ((m - i - j) / m, j / m, i / m)
    return tri, arcs, pos
