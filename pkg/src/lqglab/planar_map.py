"""Rooted planar maps as half-edge rotation systems.

A map is stored as three parallel integer arrays indexed by half-edge id:
``twin`` (the fixed-point-free pairing across each edge), ``nxt`` (the
rotation: next half-edge around the origin vertex), and ``origin`` (vertex
id).  One half-edge is distinguished as the root.

Conventions pinned here and relied on by every bijection module:

* ``nxt`` is read as the counterclockwise rotation at each vertex.
* Faces are the orbits of ``nf(h) = nxt_inv(twin(h))`` (the face to the
  left of ``h``); the face to the right of the root, ``face(twin(root))``,
  is the root face and plays the role of the outer face for disk maps.
* Half-edge ids and vertex ids are dense integers starting at 0.
"""

from __future__ import annotations

from collections import deque

import numpy as np

BLUE = 0
YELLOW = 1


class MapError(ValueError):
    """Raised when half-edge data fails to describe a valid rooted map."""


class PlanarMap:
    """Validated, immutable rooted map on an orientable surface.

    Use :func:`build_map` (or the serialization helpers) rather than
    mutating instances; all derived structure is computed once here.
    """

    __slots__ = ("twin", "nxt", "origin", "root", "n_half_edges",
                 "n_vertices", "n_edges", "n_faces", "genus",
                 "face_of", "face_next", "_face_starts")

    def __init__(self, twin, nxt, origin, root):
        twin = np.asarray(twin, dtype=np.int64)
        nxt = np.asarray(nxt, dtype=np.int64)
        origin = np.asarray(origin, dtype=np.int64)
        n = len(twin)
        if n == 0:
            raise MapError("invalid id: map must have at least one edge")
        if len(nxt) != n or len(origin) != n:
            raise MapError("invalid id: table arrays must have equal length")
        for arr, name in ((twin, "twin"), (nxt, "next")):
            if arr.min() < 0 or arr.max() >= n:
                raise MapError(f"invalid id: {name} references out-of-range half-edge")
        if not (0 <= root < n):
            raise MapError("invalid id: root out of range")
        if np.any(twin[twin] != np.arange(n)) or np.any(twin == np.arange(n)):
            raise MapError("twin-not-involution: twin must be a fixed-point-free involution")
        if len(np.unique(nxt)) != n:
            raise MapError("invalid id: next is not a permutation")
        if np.any(origin[nxt] != origin):
            raise MapError("invalid id: next does not preserve origin vertices")

        self.twin = twin
        self.nxt = nxt
        self.origin = origin
        self.root = int(root)
        self.n_half_edges = n
        self.n_edges = n // 2

        # vertex orbits of nxt must biject with origin labels, dense from 0
        orbit = _orbit_labels(nxt)
        n_orbits = orbit.max() + 1
        verts = np.unique(origin)
        if len(verts) != n_orbits or verts[0] != 0 or verts[-1] != n_orbits - 1:
            raise MapError("invalid id: origin labels must match rotation orbits, dense from 0")
        # distinct orbits must carry distinct origins
        rep_origin = np.full(n_orbits, -1, dtype=np.int64)
        rep_origin[orbit] = origin
        if len(np.unique(rep_origin)) != n_orbits:
            raise MapError("invalid id: two rotation orbits share one vertex label")
        self.n_vertices = int(n_orbits)

        if not _connected(twin, nxt):
            raise MapError("disconnected: twin and next do not act transitively")

        nxt_inv = np.empty(n, dtype=np.int64)
        nxt_inv[nxt] = np.arange(n)
        self.face_next = nxt_inv[twin]
        self.face_of = _orbit_labels(self.face_next)
        self.n_faces = int(self.face_of.max() + 1)

        euler = self.n_vertices - self.n_edges + self.n_faces
        if euler % 2 != 0 or euler > 2:
            raise MapError(f"invalid id: Euler characteristic {euler} is not of the form 2-2g")
        self.genus = (2 - euler) // 2

        self.twin.setflags(write=False)
        self.nxt.setflags(write=False)
        self.origin.setflags(write=False)
        self.face_of.setflags(write=False)
        self.face_next.setflags(write=False)

    # -- structure --------------------------------------------------------

    def face_cycle(self, h):
        """Half-edges of the face containing h, in face order starting at h."""
        out = [int(h)]
        g = int(self.face_next[h])
        while g != h:
            out.append(g)
            g = int(self.face_next[g])
        return out

    def vertex_cycle(self, h):
        """Half-edges out of origin(h) in rotation order starting at h."""
        out = [int(h)]
        g = int(self.nxt[h])
        while g != h:
            out.append(g)
            g = int(self.nxt[g])
        return out

    def root_face(self):
        """The face to the right of the root half-edge."""
        return int(self.face_of[self.twin[self.root]])

    def edge_id(self, h):
        """Canonical edge label: min of the two half-edge ids."""
        return min(int(h), int(self.twin[h]))

    def degrees(self):
        return np.bincount(self.origin, minlength=self.n_vertices)

    def face_degrees(self):
        return np.bincount(self.face_of, minlength=self.n_faces)

    def adjacency(self):
        """Neighbor lists (with multiplicity) of the underlying multigraph."""
        adj = [[] for _ in range(self.n_vertices)]
        for h in range(self.n_half_edges):
            adj[self.origin[h]].append(int(self.origin[self.twin[h]]))
        return adj

    def relabeled(self, perm):
        """Image map under a half-edge relabeling h -> perm[h] (for tests)."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        twin = perm[self.twin[inv]]
        nxt = perm[self.nxt[inv]]
        origin = self.origin[inv]
        return PlanarMap(twin, nxt, origin, perm[self.root])

    def __repr__(self):
        return (f"PlanarMap(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces}, genus={self.genus}, root={self.root})")


def _orbit_labels(perm):
    """Dense orbit labels of a permutation, numbered by smallest element.

    Pointer doubling: after ceil(log2 n) rounds every element knows the
    minimum index on its cycle, which serves as the orbit representative.
    """
    n = len(perm)
    rep = np.arange(n)
    p = np.asarray(perm).copy()
    rounds = max(1, int(np.ceil(np.log2(max(n, 2)))))
    for _ in range(rounds):
        rep = np.minimum(rep, rep[p])
        p = p[p]
    rep = np.minimum(rep, rep[p])
    _, labels = np.unique(rep, return_inverse=True)
    return labels.astype(np.int64)


def _connected(twin, nxt):
    n = len(twin)
    if n > 512:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components
        row = np.concatenate([np.arange(n), np.arange(n)])
        col = np.concatenate([twin, nxt])
        g = coo_matrix((np.ones(2 * n, dtype=np.int8), (row, col)), shape=(n, n))
        return connected_components(g, directed=False, return_labels=False) == 1
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        h = stack.pop()
        for g in (twin[h], nxt[h]):
            if not seen[g]:
                seen[g] = True
                count += 1
                stack.append(g)
    return count == n


def build_map(half_edge_table, root):
    """Validate a (twin, next, origin) table into a PlanarMap.

    `half_edge_table` is a sequence of (twin, next, origin) triples indexed
    by half-edge id, matching the PMAP text layout.
    """
    rows = list(half_edge_table)
    twin = [r[0] for r in rows]
    nxt = [r[1] for r in rows]
    origin = [r[2] for r in rows]
    return PlanarMap(twin, nxt, origin, root)


def from_face_cycles(cycles, twin, root, origins=None):
    """Build a map from explicit face cycles plus a twin pairing.

    Each cycle lists half-edge ids in face order; every half-edge must occur
    in exactly one cycle.  The rotation is recovered from
    ``nxt(h) = twin(face_prev(h))``.  Vertex labels are taken from `origins`
    when given, else derived from rotation orbits.
    """
    n = len(twin)
    face_next = np.full(n, -1, dtype=np.int64)
    for cyc in cycles:
        k = len(cyc)
        for i, h in enumerate(cyc):
            if face_next[h] != -1:
                raise MapError("invalid id: half-edge appears in two face cycles")
            face_next[h] = cyc[(i + 1) % k]
    if np.any(face_next < 0):
        raise MapError("invalid id: half-edge missing from face cycles")
    twin = np.asarray(twin, dtype=np.int64)
    face_prev = np.empty(n, dtype=np.int64)
    face_prev[face_next] = np.arange(n)
    nxt = twin[face_prev]
    if origins is None:
        origins = _orbit_labels(nxt)
    return PlanarMap(twin, nxt, origins, root)


# -- operations ------------------------------------------------------------


def dual_map(m: PlanarMap) -> PlanarMap:
    """Dual rooted map: vertices <-> faces, same half-edge ids and twin.

    The dual rotation is ``twin o nxt``; applying the construction twice
    returns the original arrays exactly, so dual(dual(m)) == m as a rooted map.
    """
    if m.genus != 0:
        raise MapError("invalid id: dual_map requires genus 0")
    nxt_star = m.twin[m.nxt]
    return PlanarMap(m.twin, nxt_star, m.face_of[np.arange(m.n_half_edges)], m.root)


def canonical_code(m: PlanarMap) -> bytes:
    """Root-preserving isomorphism invariant.

    Half-edges are relabeled in discovery order of a breadth-first walk of
    the rotation system from the root (children visited as nxt then twin);
    the code lists, per canonical half-edge, the canonical labels of its
    nxt and twin images.  Two rooted maps get equal codes iff they are
    isomorphic by a root-preserving relabeling.
    """
    n = m.n_half_edges
    label = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    label[m.root] = 0
    order[0] = m.root
    filled = 1
    emit = []
    for k in range(n):
        h = order[k]
        for g in (m.nxt[h], m.twin[h]):
            if label[g] < 0:
                label[g] = filled
                order[filled] = g
                filled += 1
            emit.append(label[g])
    body = np.asarray(emit, dtype=np.int64).tobytes()
    return b"PMC1 %d %d " % (n, filled) + body


def canonical_vertex_order(m: PlanarMap):
    """Vertices ordered by first appearance in the canonical traversal."""
    n = m.n_half_edges
    label = np.full(n, -1, dtype=np.int64)
    order = [m.root]
    label[m.root] = 0
    filled = 1
    for k in range(n):
        h = order[k]
        for g in (m.nxt[h], m.twin[h]):
            if label[g] < 0:
                label[g] = filled
                order.append(int(g))
                filled += 1
    seen = set()
    verts = []
    for h in order:
        v = int(m.origin[h])
        if v not in seen:
            seen.add(v)
            verts.append(v)
    return verts


def bfs_distances(m: PlanarMap, v: int) -> np.ndarray:
    """Exact graph distances from vertex v (edges of the multigraph)."""
    if not (0 <= v < m.n_vertices):
        raise MapError("invalid id: vertex out of range")
    dist = np.full(m.n_vertices, -1, dtype=np.int64)
    dist[v] = 0
    q = deque([v])
    adj = m.adjacency()
    while q:
        u = q.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


# -- serialization -----------------------------------------------------------


def to_text(m: PlanarMap) -> str:
    """PMAP v1 text form; bit-exact round-trip with from_text."""
    lines = [f"PMAP v1 {m.n_half_edges} {m.root}"]
    for h in range(m.n_half_edges):
        lines.append(f"{h} {m.twin[h]} {m.nxt[h]} {m.origin[h]}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> PlanarMap:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["PMAP", "v1"]:
        raise MapError("invalid id: bad PMAP header")
    n, root = int(head[2]), int(head[3])
    twin = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    origin = np.empty(n, dtype=np.int64)
    if len(lines) - 1 != n:
        raise MapError("invalid id: PMAP line count mismatch")
    for ln in lines[1:]:
        i, t, x, o = (int(tok) for tok in ln.split())
        twin[i], nxt[i], origin[i] = t, x, o
    return PlanarMap(twin, nxt, origin, root)


# -- disk triangulations ----------------------------------------------------


class DiskTriangulation:
    """Planar map whose root face is a simple outer boundary, all other
    faces triangles; multiple edges allowed, self-loops forbidden (type II).
    """

    __slots__ = ("map", "outer_face", "perimeter", "boundary_vertices")

    def __init__(self, m: PlanarMap):
        outer = m.root_face()
        fdeg = m.face_degrees()
        for f in range(m.n_faces):
            if f != outer and fdeg[f] != 3:
                raise MapError(f"invalid id: inner face {f} has degree {fdeg[f]} != 3")
        if m.genus != 0:
            raise MapError("invalid id: disk triangulation must have genus 0")
        cyc = m.face_cycle(int(np.argmax(m.face_of == outer)))
        bverts = [int(m.origin[h]) for h in cyc]
        if len(set(bverts)) != len(bverts):
            raise MapError("invalid id: outer boundary is not a simple cycle")
        if np.any(m.origin == m.origin[m.twin]):
            raise MapError("invalid id: self-loop present (type II violation)")
        if fdeg[outer] < 2:
            raise MapError("invalid id: perimeter must be >= 2")
        self.map = m
        self.outer_face = int(outer)
        self.perimeter = int(fdeg[outer])
        self.boundary_vertices = bverts

    def interior_vertices(self):
        b = set(self.boundary_vertices)
        return [v for v in range(self.map.n_vertices) if v not in b]

    def __repr__(self):
        return (f"DiskTriangulation(perimeter={self.perimeter}, "
                f"V={self.map.n_vertices}, triangles={self.map.n_faces - 1})")


class SiteColoring:
    """Vertex 2-coloring with a boundary-condition tag."""

    __slots__ = ("colors", "boundary_condition")

    def __init__(self, colors, boundary_condition="free"):
        self.colors = np.asarray(colors, dtype=np.int8)
        if np.any((self.colors != BLUE) & (self.colors != YELLOW)):
            raise MapError("invalid id: colors must be BLUE(0) or YELLOW(1)")
        self.boundary_condition = boundary_condition

    @staticmethod
    def check_blue_boundary(tri: DiskTriangulation, coloring: "SiteColoring"):
        if coloring.boundary_condition != "monochromatic-blue":
            raise MapError("invalid id: expected monochromatic-blue boundary condition")
        for v in tri.boundary_vertices:
            if coloring.colors[v] != BLUE:
                raise MapError("invalid id: boundary vertex not blue")


def colors_to_text(colors) -> str:
    lines = ["COLORS v1"]
    for v, c in enumerate(np.asarray(colors)):
        lines.append(f"{v} {'b' if c == BLUE else 'y'}")
    return "\n".join(lines) + "\n"


def colors_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines[0].split() != ["COLORS", "v1"]:
        raise MapError("invalid id: bad COLORS header")
    out = {}
    for ln in lines[1:]:
        v, c = ln.split()
        out[int(v)] = BLUE if c == "b" else YELLOW
    return np.asarray([out[v] for v in range(len(out))], dtype=np.int8)
