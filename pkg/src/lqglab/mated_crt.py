"""Mated-CRT graph from a correlated Brownian pair, and ball-growth fits.

Cells i < j are adjacent when one coordinate admits a horizontal chord
between them: max(min over cell i, min over cell j) <= min of the path on
the time interval separating the cells.  On the per-cell minima sequence
this is exactly the valley-visibility relation, so a monotone stack sweeps
all edges out in linear time; a cubic brute force serves as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .walks import BrownianPair, WalkError


@dataclass
class MatedCrtGraph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    gamma: float

    def degree(self, i):
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @staticmethod
    def from_edges(n, edges, gamma):
        edges = np.asarray(sorted(set(map(tuple, edges))), dtype=np.int64)
        if len(edges) == 0:
            raise WalkError("graph must have at least one edge")
        both = np.concatenate([edges, edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        indptr = np.cumsum(indptr)
        return MatedCrtGraph(n, indptr, both[:, 1].copy(), gamma)


def _cell_minima(path):
    p = np.asarray(path, dtype=np.float64)
    return np.minimum(p[:-1], p[1:])


def _chord_edges(path):
    """Valley-visible cell pairs for one coordinate (monotone stack)."""
    m = _cell_minima(path)
    n = len(m)
    edges = []
    stack = []
    for j in range(n):
        b = -m[j]
        while stack and -m[stack[-1]] < b:
            edges.append((stack.pop(), j))
        # ties are common (adjacent cells share an endpoint): every stacked
        # cell at exactly this level is visible, plus the first one above it
        k = len(stack) - 1
        while k >= 0 and -m[stack[k]] == b:
            edges.append((stack[k], j))
            k -= 1
        if k >= 0:
            edges.append((stack[k], j))
        stack.append(j)
    return edges


def build_mated_crt(bm: BrownianPair, gamma: float = 0.0) -> MatedCrtGraph:
    """Adjacency of Brownian time cells under the two-coordinate chord rule."""
    n = len(bm.L) - 1
    if n < 2:
        raise WalkError("need at least two cells")
    edges = _chord_edges(bm.L) + _chord_edges(bm.R)
    for i in range(n - 1):
        edges.append((i, i + 1))
    return MatedCrtGraph.from_edges(n, edges, gamma)


def brute_force_adjacency(bm: BrownianPair) -> set:
    """O(n^3) literal chord-condition oracle; only for small n."""
    out = set()
    for path in (bm.L, bm.R):
        p = np.asarray(path)
        m = _cell_minima(p)
        n = len(m)
        for i in range(n):
            for j in range(i + 1, n):
                between = p[i + 1:j + 1]
                vmin = between.min() if len(between) else np.inf
                if max(m[i], m[j]) <= vmin:
                    out.add((i, j))
    return out


def edge_set(g: MatedCrtGraph) -> set:
    out = set()
    for i in range(g.n):
        for j in g.neighbors(i):
            if i < j:
                out.add((i, int(j)))
    return out


def ball_volumes(g: MatedCrtGraph, center: int, radii):
    """|B_r(center)| for each radius, by a frontier BFS over the CSR arrays."""
    rmax = max(radii)
    dist_seen = np.zeros(g.n, dtype=bool)
    dist_seen[center] = True
    frontier = np.array([center], dtype=np.int64)
    sizes = {0: 1}
    total = 1
    for r in range(1, rmax + 1):
        nxt = []
        for v in frontier:
            nxt.append(g.indices[g.indptr[v]:g.indptr[v + 1]])
        if nxt:
            cand = np.unique(np.concatenate(nxt))
            cand = cand[~dist_seen[cand]]
        else:
            cand = np.empty(0, dtype=np.int64)
        if len(cand) == 0:
            raise WalkError("radius exceeds diameter from this center")
        dist_seen[cand] = True
        total += len(cand)
        frontier = cand
        sizes[r] = total
    return np.array([sizes[r] for r in radii], dtype=np.float64)


def ball_growth_exponent(g: MatedCrtGraph, radii, centers: int, rng,
                         center_pool=None):
    """Log-log slope of mean ball volume against radius.

    Centers are sampled away from the first and last 1% of cells to curb
    time-boundary bias (or from `center_pool` when given, e.g. for injected
    lattice test graphs); the standard error is the spread of per-center
    slopes over sqrt(#centers).
    """
    radii = sorted(int(r) for r in radii)
    if len(radii) < 2:
        raise WalkError("need at least two radii")
    if center_pool is not None:
        pool = np.asarray(center_pool, dtype=np.int64)
        picks = pool[rng.integers(0, len(pool), size=centers)]
    else:
        lo, hi = int(0.01 * g.n), int(0.99 * g.n)
        if hi <= lo:
            raise WalkError("graph too small for interior centers")
        picks = rng.integers(lo, hi, size=centers)
    logs_r = np.log(np.asarray(radii, dtype=np.float64))
    vols = np.empty((centers, len(radii)))
    slopes = np.empty(centers)
    for k, c in enumerate(picks):
        vols[k] = ball_volumes(g, int(c), radii)
        slopes[k] = np.polyfit(logs_r, np.log(vols[k]), 1)[0]
    mean_vol = vols.mean(axis=0)
    est = float(np.polyfit(logs_r, np.log(mean_vol), 1)[0])
    stderr = float(slopes.std(ddof=1) / np.sqrt(centers)) if centers > 1 else 0.0
    return est, stderr


def path_graph(n: int) -> MatedCrtGraph:
    """Injected 1D test graph (exponent 1)."""
    return MatedCrtGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], 0.0)


def grid_graph(side: int) -> MatedCrtGraph:
    """Injected 2D grid test graph (exponent 2)."""
    edges = []
    for y in range(side):
        for x in range(side):
            v = y * side + x
            if x + 1 < side:
                edges.append((v, v + 1))
            if y + 1 < side:
                edges.append((v, v + side))
    return MatedCrtGraph.from_edges(side * side, edges, 0.0)
