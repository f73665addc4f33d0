from itertools import product

import numpy as np
import pytest

from lqglab.cardy_smirnov import (BoundaryArcs, triangular_disk, event_Ea,
                                  event_Ea_oracle, event_all_three,
                                  cardy_smirnov_embed, exact_embedding,
                                  area_measure, rescaled_metric,
                                  percolation_interfaces, nearest_vertex,
                                  FULL_TRIANGLE)
from lqglab.cardy_smirnov import _event_side_all
from lqglab.planar_map import (SiteColoring, BLUE, YELLOW, MapError,
                               canonical_code)
from lqglab.perc_tri import sew_walk_to_percolated
from lqglab.walks import enumerate_excursions, KREWERAS
from lqglab.rng import rng_stream


def colorings(tri, base=BLUE):
    interior = tri.interior_vertices()
    full = np.full(tri.map.n_vertices, BLUE, dtype=np.int8)
    for bits in product([BLUE, YELLOW], repeat=len(interior)):
        c = full.copy()
        for v, b in zip(interior, bits):
            c[v] = b
        yield c


def sewn_corpus(max_vertices=12):
    """Distinct sewn triangulations with at least three boundary edges."""
    seen = set()
    out = []
    for ell, maxlen in ((1, 8), (2, 7)):
        for length in range(2, maxlen + 1):
            for w in enumerate_excursions(KREWERAS, length, (ell, 0), (0, 0)):
                p = sew_walk_to_percolated(w, ell)
                tri = p.tri
                code = canonical_code(tri.map)
                if code in seen or tri.map.n_vertices > max_vertices:
                    continue
                seen.add(code)
                m = tri.map
                h0 = int(np.flatnonzero(m.face_of == tri.outer_face)[0])
                eids = []
                for h in m.face_cycle(h0):
                    e = m.edge_id(h)
                    if e not in eids:
                        eids.append(e)
                if len(eids) < 3:
                    continue
                out.append((tri, BoundaryArcs(tri, *eids[:3])))
    return out


def test_all_blue_and_all_yellow_events():
    tri, arcs, _ = triangular_disk(3)
    interior = tri.interior_vertices()
    full = np.full(tri.map.n_vertices, BLUE, dtype=np.int8)
    col = SiteColoring(full, "monochromatic-blue")
    assert event_Ea(tri, col, arcs, interior[0])
    c2 = full.copy()
    c2[interior] = YELLOW
    col2 = SiteColoring(c2, "monochromatic-blue")
    assert not event_Ea(tri, col2, arcs, interior[0])


def test_fast_agrees_with_oracle_lattice():
    for m_side in (3, 4):
        tri, arcs, _ = triangular_disk(m_side)
        for c in colorings(tri):
            fast = _event_side_all(tri, c, arcs.arcs[("c", "a")],
                                   arcs.arcs[("a", "b")],
                                   arcs.arcs[("b", "c")], arcs.edges[0])
            orac = event_Ea_oracle(tri, SiteColoring(c, "monochromatic-blue"),
                                   arcs)
            assert np.array_equal(fast, orac)


def test_fast_agrees_with_oracle_sewn_maps():
    bad = 0
    for tri, arcs in sewn_corpus():
        for c in colorings(tri):
            fast = _event_side_all(tri, c, arcs.arcs[("c", "a")],
                                   arcs.arcs[("a", "b")],
                                   arcs.arcs[("b", "c")], arcs.edges[0])
            orac = event_Ea_oracle(tri, SiteColoring(c, "monochromatic-blue"),
                                   arcs)
            bad += not np.array_equal(fast, orac)
    assert bad == 0


def test_rotation_equivariance_exact():
    tri, arcs, _ = triangular_disk(3)
    e1 = exact_embedding(tri, arcs)
    e2 = exact_embedding(tri, arcs.rotated())
    # cycling (a,b,c) -> (b,c,a) cycles the coordinates
    assert np.allclose(e1.positions, np.roll(e2.positions, 1, axis=1),
                       atol=1e-12)


def test_corner_vertex_concentrates():
    tri, arcs, _ = triangular_disk(3)
    emb = exact_embedding(tri, arcs)
    # the boundary vertex shared by arcs (c,a) and (a,b) sits at the corner
    shared_corner = arcs.arcs[("c", "a")][-1]
    pos = emb.positions[shared_corner]
    assert pos[0] > 0.8


def test_positions_normalized_and_stderr():
    tri, arcs, _ = triangular_disk(4)
    rng = rng_stream(30)
    emb = cardy_smirnov_embed(tri, arcs, 300, rng)
    ok = ~emb.undefined
    assert np.allclose(emb.positions[ok].sum(axis=1), 1.0, atol=1e-9)
    assert np.all(emb.stderr >= 0)
    assert emb.samples_used == 300
    assert emb.n_scale == tri.perimeter ** 2


def _bary(x, y):
    b2 = 2.0 * y / np.sqrt(3)
    b1 = x - y / np.sqrt(3)
    return (1.0 - b1 - b2, b1, b2)


def test_area_measure_total_and_additivity():
    tri, arcs, _ = triangular_disk(4)
    emb = exact_embedding(tri, arcs)
    eps = 1e-6
    whole = [_bary(-eps, -eps), _bary(1 + eps, -eps), _bary(0.5, 0.9)]
    total = area_measure(emb, whole)
    assert total == tri.map.n_vertices / emb.n_scale
    assert area_measure(emb, []) == 0.0
    # two halves of a generic box are additive (counts are integers)
    split = 0.4123
    box = [_bary(0.15, 0.05), _bary(0.85, 0.05), _bary(0.85, 0.55),
           _bary(0.15, 0.55)]
    left = [_bary(0.15, 0.05), _bary(split, 0.05), _bary(split, 0.55),
            _bary(0.15, 0.55)]
    right = [_bary(split, 0.05), _bary(0.85, 0.05), _bary(0.85, 0.55),
             _bary(split, 0.55)]
    assert area_measure(emb, left) + area_measure(emb, right) \
        == area_measure(emb, box)


def test_rescaled_metric_properties():
    tri, arcs, _ = triangular_disk(4)
    emb = exact_embedding(tri, arcs)
    x = (0.6, 0.2, 0.2)
    y = (0.1, 0.4, 0.5)
    assert rescaled_metric(emb, tri, x, x) == 0.0
    assert rescaled_metric(emb, tri, x, y) == rescaled_metric(emb, tri, y, x)
    rng = rng_stream(31)
    for _ in range(200):
        p = rng.dirichlet([1, 1, 1], size=3)
        d01 = rescaled_metric(emb, tri, p[0], p[1])
        d12 = rescaled_metric(emb, tri, p[1], p[2])
        d02 = rescaled_metric(emb, tri, p[0], p[2])
        assert d02 <= d01 + d12 + 1e-12


def test_nearest_vertex_tie_break():
    tri, arcs, _ = triangular_disk(3)
    emb = exact_embedding(tri, arcs)
    v = nearest_vertex(emb, emb.positions[5])
    d = np.sum((emb.positions - emb.positions[5]) ** 2, axis=1)
    winners = np.flatnonzero(np.isclose(d, d.min()))
    assert v == winners.min()


def test_interfaces_monochromatic_and_single_yellow():
    tri, arcs, _ = triangular_disk(4)
    full = np.full(tri.map.n_vertices, BLUE, dtype=np.int8)
    assert percolation_interfaces(
        tri, SiteColoring(full, "monochromatic-blue")) == []
    interior = tri.interior_vertices()
    c = full.copy()
    c[interior[0]] = YELLOW
    loops = percolation_interfaces(tri, SiteColoring(c, "monochromatic-blue"))
    assert len(loops) == 1
    deg = tri.map.degrees()[interior[0]]
    assert len(loops[0]) == deg


def test_interface_count_matches_cluster_count():
    # loops = total monochromatic clusters - 1 (nesting-tree identity),
    # cluster count from an independent union-find over the full graph
    rng = rng_stream(32)
    tri, arcs, _ = triangular_disk(5)
    m = tri.map
    interior = tri.interior_vertices()
    for _ in range(40):
        colors = np.full(m.n_vertices, BLUE, dtype=np.int8)
        colors[interior] = rng.integers(0, 2, size=len(interior))
        loops = percolation_interfaces(
            tri, SiteColoring(colors, "monochromatic-blue"))
        parent = list(range(m.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for h in range(m.n_half_edges):
            g = int(m.twin[h])
            if h < g:
                u, v = int(m.origin[h]), int(m.origin[g])
                if colors[u] == colors[v]:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[rv] = ru
        n_clusters = len({find(v) for v in range(m.n_vertices)})
        assert len(loops) == n_clusters - 1
    # loops are edge-disjoint
    seen = set()
    for lp in loops:
        for e in lp:
            assert e not in seen
            seen.add(e)


def test_invalid_arcs_rejected():
    tri, arcs, _ = triangular_disk(3)
    a, b, c = arcs.edges
    with pytest.raises(MapError, match="counterclockwise"):
        BoundaryArcs(tri, a, c, b)
    with pytest.raises(MapError, match="distinct"):
        BoundaryArcs(tri, a, a, b)
    inner_edge = None
    m = tri.map
    for h in range(m.n_half_edges):
        if m.face_of[h] != tri.outer_face and \
                m.face_of[m.twin[h]] != tri.outer_face:
            inner_edge = m.edge_id(h)
            break
    with pytest.raises(MapError, match="outer face"):
        BoundaryArcs(tri, a, b, inner_edge)
