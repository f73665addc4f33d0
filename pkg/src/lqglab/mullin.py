"""Sewing bijection between nearest-neighbor quadrant excursions and
spanning-tree-decorated rooted maps.

The forward direction reads the walk step by step and glues one triangle per
step onto an active boundary edge, building the refined triangulation whose
vertices are the primal and dual vertices of the decorated map: an up step
opens a primal tree edge, a down step closes the most recent open one, and
right/left do the same on the dual side.  The initial edge and the final
active edge are identified at the end, closing the sphere.

Conventions pinned here (exercised by the exhaustive round-trip tests):

* the active edge is always a primal/dual "mixed" edge, its exposed side
  oriented dual-vertex -> primal-vertex;
* open primal edges sit after the active edge on the boundary cycle,
  newest first; open dual edges sit before it, newest last;
* the decorated map's root is the first map half-edge met when scanning the
  rotation at the primal start vertex from the initial edge.
"""

from __future__ import annotations

import numpy as np

from .planar_map import PlanarMap, MapError, canonical_code
from .walks import LatticeWalk, MULLIN, WalkError, UP, DOWN, RIGHT, LEFT

TREE, DUAL, MIX = 0, 1, 2


class TreeDecoratedMap:
    """Rooted map with a distinguished spanning tree (edge-id set)."""

    __slots__ = ("map", "tree_edges")

    def __init__(self, m: PlanarMap, tree_edges):
        tree_edges = frozenset(int(e) for e in tree_edges)
        for e in tree_edges:
            if not (0 <= e < m.n_half_edges) or m.edge_id(e) != e:
                raise MapError("invalid id: tree edge ids must be canonical edge ids")
        # spanning: V-1 edges, connected via union-find
        if len(tree_edges) != m.n_vertices - 1:
            raise MapError("tree not spanning: wrong edge count")
        parent = list(range(m.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in tree_edges:
            a, b = find(int(m.origin[e])), find(int(m.origin[m.twin[e]]))
            if a == b:
                raise MapError("tree not spanning: cycle in tree edges")
            parent[a] = b
        self.map = m
        self.tree_edges = tree_edges

    def __repr__(self):
        return f"TreeDecoratedMap(E={self.map.n_edges}, |T|={len(self.tree_edges)})"


class RefinedTriangulation:
    """Triangulated sphere carrying the primal tree, dual tree, and sewing order."""

    __slots__ = ("tri", "primal_tree", "dual_tree", "edge_sequence",
                 "peano_faces", "primal_vertices")

    def __init__(self, tri, primal_tree, dual_tree, edge_sequence,
                 peano_faces, primal_vertices):
        self.tri = tri
        self.primal_tree = frozenset(primal_tree)
        self.dual_tree = frozenset(dual_tree)
        self.edge_sequence = list(edge_sequence)
        self.peano_faces = list(peano_faces)
        self.primal_vertices = frozenset(primal_vertices)
        self._validate()

    def _validate(self):
        m = self.tri
        n = m.n_half_edges
        if m.n_faces != m.n_edges // 3 * 2 or np.any(m.face_degrees() != 3):
            raise MapError("malformed refinement: faces must all be triangles")
        eid = np.minimum(np.arange(n), m.twin)
        is_primal_v = np.zeros(m.n_vertices, dtype=bool)
        is_primal_v[list(self.primal_vertices)] = True
        in_tree = np.zeros(n, dtype=bool)
        in_tree[list(self.primal_tree)] = True
        in_dual = np.zeros(n, dtype=bool)
        in_dual[list(self.dual_tree)] = True
        kind = np.where(in_tree[eid], 0, np.where(in_dual[eid], 1, 2))
        pa = is_primal_v[m.origin]
        pb = is_primal_v[m.origin[m.twin]]
        ok = np.where(kind == 0, pa & pb, np.where(kind == 1, ~pa & ~pb, pa != pb))
        if not np.all(ok):
            raise MapError("malformed refinement: edge class vs vertex class")
        face_rep = np.full(m.n_faces, -1, dtype=np.int64)
        face_rep[m.face_of[::-1]] = np.arange(n - 1, -1, -1)
        tri3 = np.stack([face_rep, m.face_next[face_rep],
                         m.face_next[m.face_next[face_rep]]])
        fkinds = np.sort(kind[tri3], axis=0)
        good = ((fkinds[0] <= 1) & (fkinds[1] == 2) & (fkinds[2] == 2))
        if not np.all(good):
            raise MapError("malformed refinement: face must hold one tree edge "
                           "and two mixed edges")
        if len(self.edge_sequence) != m.n_faces + 1 or \
                self.edge_sequence[0] != self.edge_sequence[-1]:
            raise MapError("malformed refinement: bad sewing edge sequence")

    def __repr__(self):
        return f"RefinedTriangulation(triangles={self.tri.n_faces})"


def sew_walk_to_refined(w: LatticeWalk) -> RefinedTriangulation:
    """Sew a quadrant excursion into its refined triangulation."""
    if w.step_set.name != "mullin":
        raise WalkError("walk must use the nearest-neighbor step set")
    if tuple(w.start) != (0, 0):
        raise WalkError("walk not an excursion: must start at the origin")
    w.check_excursion((0, 0))
    n2 = len(w)
    if n2 == 0 or n2 % 2:
        raise WalkError("walk not an excursion: need positive even length")

    nh = 2 + 3 * n2  # upper bound on half-edges before compaction
    twin = np.full(nh, -1, dtype=np.int64)
    fnext = np.full(nh, -1, dtype=np.int64)
    origin = np.full(nh, -1, dtype=np.int64)
    eclass = np.full(nh, -1, dtype=np.int8)
    bnext = np.full(nh, -1, dtype=np.int64)
    bprev = np.full(nh, -1, dtype=np.int64)
    vclass = [0, 1]  # 0 primal, 1 dual
    n_he = 0

    def new_pair(o1, o2, cls):
        nonlocal n_he
        a, b = n_he, n_he + 1
        n_he += 2
        twin[a], twin[b] = b, a
        origin[a], origin[b] = o1, o2
        eclass[a] = eclass[b] = cls
        return a, b

    def blink(a, b):
        bnext[a] = b
        bprev[b] = a

    def bdrop(h):
        blink(bprev[h], bnext[h])

    # initial edge e0 between primal 0 and dual 1; both sides exposed
    h0, h0p = new_pair(0, 1, MIX)  # h0: v0->v0*, h0p: v0*->v0
    blink(h0, h0p)
    blink(h0p, h0)
    active = h0p
    seq = [h0p]  # face-side representative of each e_k
    face_heads = []

    for step in w.steps:
        vstar, v = int(origin[active]), int(origin[twin[active]])
        d_side, p_side = int(bprev[active]), int(bnext[active])
        if step == UP:
            vp = len(vclass)
            vclass.append(0)
            t_in, t_out = new_pair(v, vp, TREE)
            ek_in, ek_out = new_pair(vp, vstar, MIX)
            fnext[active], fnext[t_in], fnext[ek_in] = t_in, ek_in, active
            blink(d_side, ek_out)
            blink(ek_out, t_out)
            blink(t_out, p_side)
            face_heads.append(active)
            active = ek_out
        elif step == DOWN:
            t_hat = p_side
            if eclass[t_hat] != TREE:
                raise WalkError("walk not an excursion: no open tree edge to close")
            vpp = int(origin[twin[t_hat]])
            ek_in, ek_out = new_pair(vpp, vstar, MIX)
            fnext[active], fnext[t_hat], fnext[ek_in] = t_hat, ek_in, active
            p2 = int(bnext[t_hat])
            blink(d_side, ek_out)
            blink(ek_out, p2)
            face_heads.append(active)
            active = ek_out
        elif step == RIGHT:
            wp = len(vclass)
            vclass.append(1)
            ek_in, ek_out = new_pair(v, wp, MIX)
            d_in, d_out = new_pair(wp, vstar, DUAL)
            fnext[active], fnext[ek_in], fnext[d_in] = ek_in, d_in, active
            blink(d_side, d_out)
            blink(d_out, ek_out)
            blink(ek_out, p_side)
            face_heads.append(active)
            active = ek_out
        else:  # LEFT
            d_hat = d_side
            if eclass[d_hat] != DUAL:
                raise WalkError("walk not an excursion: no open dual edge to close")
            wpp = int(origin[d_hat])
            ek_in, ek_out = new_pair(v, wpp, MIX)
            fnext[d_hat], fnext[active], fnext[ek_in] = active, ek_in, d_hat
            d2 = int(bprev[d_hat])
            blink(d2, ek_out)
            blink(ek_out, p_side)
            face_heads.append(d_hat)
            active = ek_out
        seq.append(int(twin[active]))

    # boundary must now be the 2-gon [h0, active]; identify e0 with e_{2n}
    if bnext[h0] != active or bnext[active] != h0:
        raise WalkError("walk not an excursion: sewing did not close")
    i_last = int(twin[active])
    twin[h0p], twin[i_last] = i_last, h0p
    seq[-1] = h0p

    keep = np.ones(n_he, dtype=bool)
    keep[h0] = keep[active] = False
    relabel = -np.ones(n_he, dtype=np.int64)
    relabel[keep] = np.arange(keep.sum())
    twin2 = relabel[twin[:n_he][keep]]
    fnext2 = relabel[fnext[:n_he][keep]]
    origin2 = origin[:n_he][keep]
    fprev2 = np.empty_like(fnext2)
    fprev2[fnext2] = np.arange(len(fnext2))
    nxt2 = twin2[fprev2]
    tri = PlanarMap(twin2, nxt2, origin2, relabel[h0p])

    eclass2 = eclass[:n_he][keep]
    eid = np.minimum(np.arange(len(twin2)), twin2)
    primal_tree = set(np.unique(eid[eclass2 == TREE]).tolist())
    dual_tree = set(np.unique(eid[eclass2 == DUAL]).tolist())
    edge_seq = eid[relabel[np.asarray(seq)]].tolist()
    peano = tri.face_of[relabel[np.asarray(face_heads)]].tolist()
    primal_vertices = {i for i, c in enumerate(vclass) if c == 0}
    return RefinedTriangulation(tri, primal_tree, dual_tree, edge_seq,
                                peano, primal_vertices)


def peano_order(r: RefinedTriangulation):
    """Faces in sewing order; consecutive faces share the sewing edges e_k."""
    return list(r.peano_faces)


def extract_tree_map(r: RefinedTriangulation) -> TreeDecoratedMap:
    """Contract the refinement back to the primal decorated map.

    The rotation at each primal vertex is read off the refined rotation:
    primal tree edges pass through unchanged, and each corner whose face
    carries a dual tree edge contributes one non-tree map edge (the two
    faces sharing that dual edge give the two half-edges).
    """
    tri = r.tri
    pv = sorted(r.primal_vertices)
    vmap = {v: i for i, v in enumerate(pv)}
    dual_edge_faces = {}
    for e in r.dual_tree:
        dual_edge_faces[e] = (int(tri.face_of[e]), int(tri.face_of[tri.twin[e]]))
    dual_face_of = {}
    for e, (f1, f2) in dual_edge_faces.items():
        dual_face_of[f1] = (e, 0)
        dual_face_of[f2] = (e, 1)
    in_tree_he = np.zeros(tri.n_half_edges, dtype=bool)
    reps = np.fromiter(r.primal_tree, dtype=np.int64, count=len(r.primal_tree))
    if len(reps):
        in_tree_he[reps] = True
        in_tree_he[tri.twin[reps]] = True

    # one map half-edge per emission; key them for twin pairing
    emissions = {}  # key -> new half-edge id
    order_at = {}
    he_origin = []
    he_key = []

    def emit(key, v):
        idx = len(he_key)
        emissions[key] = idx
        he_key.append(key)
        he_origin.append(vmap[v])
        return idx

    vert_rep = np.full(tri.n_vertices, -1, dtype=np.int64)
    vert_rep[tri.origin[::-1]] = np.arange(tri.n_half_edges - 1, -1, -1)
    face_of = tri.face_of
    for v in pv:
        cyc = tri.vertex_cycle(int(vert_rep[v]))
        local = []
        for h in cyc:
            if in_tree_he[h]:
                local.append(emit(("t", h), v))
            f = int(face_of[h])
            if f in dual_face_of:
                local.append(emit(("d", f), v))
        if not local:
            raise MapError("malformed refinement: primal vertex with no map edges")
        order_at[v] = local

    # the map root is the edge contributed by the first sewn triangle (the
    # face holding the refined root): its tree edge, or its dual-edge corner
    f1 = int(tri.face_of[tri.root])
    root_key = None
    if f1 in dual_face_of:
        root_key = ("d", f1)
    else:
        for h in tri.face_cycle(tri.root):
            if tri.edge_id(h) in r.primal_tree and ("t", int(h)) in emissions:
                root_key = ("t", int(h))
                break
    if root_key is None:
        raise MapError("malformed refinement: root face contributes no map edge")
    root_m = emissions[root_key]

    n = len(he_key)
    nxt = np.empty(n, dtype=np.int64)
    for v, local in order_at.items():
        k = len(local)
        for i, h in enumerate(local):
            nxt[h] = local[(i + 1) % k]
    twin = np.empty(n, dtype=np.int64)
    for h, key in enumerate(he_key):
        kind, val = key
        if kind == "t":
            twin[h] = emissions[("t", int(tri.twin[val]))]
        else:
            e, side = dual_face_of[val]
            other = dual_edge_faces[e][1 - side]
            twin[h] = emissions[("d", other)]
    m = PlanarMap(twin, nxt, np.asarray(he_origin), root_m)
    tree = {m.edge_id(h) for h, key in enumerate(he_key) if key[0] == "t"}
    return TreeDecoratedMap(m, tree)


def map_tree_to_walk(d: TreeDecoratedMap) -> LatticeWalk:
    """Inverse sewing: read the walk off the contour between the two trees.

    The contour advances against the stored rotation (the sewing lays the
    rotation out clockwise relative to the tour): a tree half-edge is
    traversed to its far end, a non-tree half-edge is crossed in place.
    """
    m = d.map
    n2 = m.n_half_edges
    nxt_inv = np.empty(n2, dtype=np.int64)
    nxt_inv[m.nxt] = np.arange(n2)
    is_tree = np.zeros(n2, dtype=bool)
    if d.tree_edges:
        reps = np.fromiter(d.tree_edges, dtype=np.int64, count=len(d.tree_edges))
        is_tree[reps] = True
        is_tree[m.twin[reps]] = True
    eid = np.minimum(np.arange(n2), m.twin)
    steps = np.empty(n2, dtype=np.int64)
    seen_edge = np.zeros(n2, dtype=bool)
    h = m.root
    twin = m.twin
    for k in range(n2):
        e = eid[h]
        first = not seen_edge[e]
        seen_edge[e] = True
        if is_tree[h]:
            steps[k] = UP if first else DOWN
            h = int(nxt_inv[twin[h]])
        else:
            steps[k] = RIGHT if first else LEFT
            h = int(nxt_inv[h])
    walk = LatticeWalk(MULLIN, (0, 0), steps)
    walk.check_excursion((0, 0))
    return walk


def decorated_code(d: TreeDecoratedMap) -> bytes:
    """Canonical code of the rooted map plus tree membership flags."""
    m = d.map
    base = canonical_code(m)
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
    flags = bytearray()
    seen = set()
    for h in order:
        e = m.edge_id(h)
        if e not in seen:
            seen.add(e)
            flags.append(1 if e in d.tree_edges else 0)
    return base + b"|T" + bytes(flags)
