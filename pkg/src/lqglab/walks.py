"""Quadrant lattice walks: exact counting, enumeration, uniform sampling.

Two step sets matter here: the four nearest-neighbor steps (tree-decorated
maps) and the Kreweras steps (0,1), (1,0), (-1,-1) (percolated
triangulations).  Counting is exact big-integer dynamic programming;
sampling is exact at test scale (interleaved 1D excursions for the
nearest-neighbor set, backward DP for small Kreweras walks) with rejection
fallbacks at experiment scale.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class StepSet:
    steps: tuple
    name: str

    def __post_init__(self):
        if not self.steps:
            raise WalkError("step set must be nonempty")
        if len(set(self.steps)) != len(self.steps):
            raise WalkError("steps must be distinct")

    def __len__(self):
        return len(self.steps)


# index order matters: enumeration is lexicographic in step indices
MULLIN = StepSet(((0, 1), (0, -1), (1, 0), (-1, 0)), "mullin")
KREWERAS = StepSet(((0, 1), (1, 0), (-1, -1)), "kreweras")
UP, DOWN, RIGHT, LEFT = 0, 1, 2, 3

_BY_NAME = {"mullin": MULLIN, "kreweras": KREWERAS}


def step_set_by_name(name: str) -> StepSet:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise WalkError(f"unknown step set {name!r}") from None


@dataclass
class LatticeWalk:
    step_set: StepSet
    start: tuple
    steps: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int64)
        if len(self.steps) and (self.steps.min() < 0 or self.steps.max() >= len(self.step_set)):
            raise WalkError("step index out of range")

    def __len__(self):
        return len(self.steps)

    def positions(self) -> np.ndarray:
        """(len+1, 2) array of lattice positions including the start."""
        vecs = np.asarray(self.step_set.steps, dtype=np.int64)
        pos = np.zeros((len(self.steps) + 1, 2), dtype=np.int64)
        pos[0] = self.start
        if len(self.steps):
            pos[1:] = np.asarray(self.start) + np.cumsum(vecs[self.steps], axis=0)
        return pos

    def end(self):
        p = self.positions()[-1]
        return (int(p[0]), int(p[1]))

    def is_quadrant_walk(self):
        return bool(np.all(self.positions() >= 0))

    def check_excursion(self, end):
        if not self.is_quadrant_walk():
            raise WalkError("walk leaves the quadrant")
        if self.end() != tuple(end):
            raise WalkError(f"walk ends at {self.end()}, expected {tuple(end)}")


@dataclass
class BrownianPair:
    dt: float
    L: np.ndarray
    R: np.ndarray
    rho: float

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=np.float64)
        self.R = np.asarray(self.R, dtype=np.float64)
        if len(self.L) != len(self.R):
            raise WalkError("L and R must have equal length")


# -- exact counting ----------------------------------------------------------


def count_excursions(s: StepSet, length: int, start, end):
    """Number of quadrant walks start->end with `length` steps (exact int)."""
    if length < 0:
        raise WalkError("length must be >= 0")
    if length > 10_000:
        raise WalkError("counts beyond length 10^4 are not offered")
    table = _forward_dp(s, length, start)
    return table[-1].get(tuple(end), 0)


def _forward_dp(s: StepSet, length: int, start):
    """List of dicts position -> count after k steps, quadrant-constrained."""
    start = (int(start[0]), int(start[1]))
    if start[0] < 0 or start[1] < 0:
        raise WalkError("start must lie in the quadrant")
    layers = [{start: 1}]
    for _ in range(length):
        nxt = {}
        for (x, y), c in layers[-1].items():
            for dx, dy in s.steps:
                nx, ny = x + dx, y + dy
                if nx >= 0 and ny >= 0:
                    key = (nx, ny)
                    nxt[key] = nxt.get(key, 0) + c
        layers.append(nxt)
    return layers


_BACKWARD_DP_CACHE: dict = {}


def _backward_dp(s: StepSet, length: int, end):
    """layers[k][pos] = number of quadrant ways to reach `end` in k steps."""
    end = (int(end[0]), int(end[1]))
    key = (s.name, s.steps, length, end)
    hit = _BACKWARD_DP_CACHE.get(key)
    if hit is not None:
        return hit
    layers = [{end: 1}]
    for _ in range(length):
        prv = {}
        for (x, y), c in layers[-1].items():
            for dx, dy in s.steps:
                px, py = x - dx, y - dy
                if px >= 0 and py >= 0:
                    k = (px, py)
                    prv[k] = prv.get(k, 0) + c
        layers.append(prv)
    if length <= 64:
        if len(_BACKWARD_DP_CACHE) > 32:
            _BACKWARD_DP_CACHE.clear()
        _BACKWARD_DP_CACHE[key] = layers
    return layers


def enumerate_excursions(s: StepSet, length: int, start, end, cap: int = 1_000_000):
    """All quadrant walks start->end, lexicographic in step indices."""
    total = count_excursions(s, length, start, end)
    if total > cap:
        raise WalkError(f"enumeration of {total} walks exceeds cap {cap}")
    layers = _backward_dp(s, length, end)
    out = []
    steps = []

    def rec(pos, k):
        if k == length:
            out.append(LatticeWalk(s, tuple(start), np.array(steps, dtype=np.int64)))
            return
        rem = length - k - 1
        for i, (dx, dy) in enumerate(s.steps):
            nx, ny = pos[0] + dx, pos[1] + dy
            if nx >= 0 and ny >= 0 and layers[rem].get((nx, ny), 0) > 0:
                steps.append(i)
                rec((nx, ny), k + 1)
                steps.pop()

    rec((int(start[0]), int(start[1])), 0)
    return out


# -- exact sampling ----------------------------------------------------------


def _randint_below(n: int, rng) -> int:
    """Uniform integer in [0, n) with exact big-int support."""
    if n <= 0:
        raise WalkError("empty range")
    nbits = (n - 1).bit_length() or 1
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    while True:
        u = int.from_bytes(rng.bytes(nbytes), "little") & mask
        if u < n:
            return u


def _weighted_index(weights, rng) -> int:
    cum = []
    t = 0
    for w in weights:
        t += w
        cum.append(t)
    if t == 0:
        raise WalkError("empty-set error: all weights zero")
    return bisect_right(cum, _randint_below(t, rng))


def sample_dyck(m: int, rng) -> np.ndarray:
    """Uniform nonnegative +-1 path of length 2m from 0 to 0 (cycle lemma)."""
    if m == 0:
        return np.empty(0, dtype=np.int64)
    word = np.concatenate([np.ones(m, dtype=np.int64), -np.ones(m + 1, dtype=np.int64)])
    word = word[rng.permutation(2 * m + 1)]
    prefix = np.cumsum(word)
    p = int(np.argmin(prefix))  # first index attaining the minimum
    rotated = np.concatenate([word[p + 1:], word[:p]])
    return rotated


def _mullin_weight_cum(n: int):
    """Cumulative counts of excursions by number of x-step pairs.

    w_k = C(2n,2k) Cat_k Cat_{n-k}, built by an exact integer recurrence so
    the table costs O(n) big-int multiplies; cached since samplers reuse it.
    """
    w = math.comb(2 * n, n) // (n + 1)  # k = n: Cat_n * Cat_0
    # iterate downward from k=n so start value is a single Catalan number
    ws = [0] * (n + 1)
    ws[n] = w
    for k in range(n, 0, -1):
        # w_{k-1} = w_k * (2k)(2k-1)... derived from the three ratio factors
        w = w * (2 * k) * (k + 1) // ((2 * n - 2 * k + 2) * (n - k + 2))
        ws[k - 1] = w
    cum = []
    t = 0
    for x in ws:
        t += x
        cum.append(t)
    return cum, t


_MULLIN_CUM_CACHE: dict = {}


def _sample_mullin_excursion(n2: int, rng) -> LatticeWalk:
    """Uniform nearest-neighbor quadrant excursion (0,0)->(0,0), length 2n.

    Decomposes the walk into its x-subwalk and y-subwalk: choose how many
    steps move in x (weighted by exact counts), place them uniformly, then
    draw each 1D excursion uniformly.  Linear time, exactly uniform.
    """
    if n2 % 2:
        raise WalkError("empty-set error: odd length has no excursions")
    n = n2 // 2
    if n not in _MULLIN_CUM_CACHE:
        if len(_MULLIN_CUM_CACHE) > 16:
            _MULLIN_CUM_CACHE.clear()
        _MULLIN_CUM_CACHE[n] = _mullin_weight_cum(n)
    cum, total = _MULLIN_CUM_CACHE[n]
    j = bisect_right(cum, _randint_below(total, rng))  # number of x-step pairs
    xpos = np.sort(rng.choice(n2, size=2 * j, replace=False))
    dyck_x = sample_dyck(j, rng)
    dyck_y = sample_dyck(n - j, rng)
    steps = np.empty(n2, dtype=np.int64)
    is_x = np.zeros(n2, dtype=bool)
    is_x[xpos] = True
    steps[is_x] = np.where(dyck_x > 0, RIGHT, LEFT)
    steps[~is_x] = np.where(dyck_y > 0, UP, DOWN)
    return LatticeWalk(MULLIN, (0, 0), steps)


def sample_excursion_dp(s: StepSet, length: int, start, end, rng) -> LatticeWalk:
    """Exactly uniform sampling by backward-count DP (small lengths)."""
    layers = _backward_dp(s, length, end)
    pos = (int(start[0]), int(start[1]))
    if layers[length].get(pos, 0) == 0:
        raise WalkError("empty-set error: no excursions with these parameters")
    steps = np.empty(length, dtype=np.int64)
    for k in range(length):
        rem = length - k - 1
        opts = []
        w = []
        for i, (dx, dy) in enumerate(s.steps):
            nx, ny = pos[0] + dx, pos[1] + dy
            if nx >= 0 and ny >= 0:
                c = layers[rem].get((nx, ny), 0)
                if c:
                    opts.append((i, (nx, ny)))
                    w.append(c)
        i = _weighted_index(w, rng)
        steps[k], pos = opts[i][0], opts[i][1]
    return LatticeWalk(s, tuple(start), steps)


def sample_excursion_rejection(s: StepSet, length: int, start, end, rng,
                               max_attempts: int = 10_000_000):
    """Uniform excursion via iid-step rejection with early abort.

    Returns (walk, attempts); exact but slow when excursions are rare.
    """
    vecs = s.steps
    k = len(vecs)
    end = (int(end[0]), int(end[1]))
    for attempt in range(1, max_attempts + 1):
        idx = rng.integers(0, k, size=length)
        x, y = int(start[0]), int(start[1])
        ok = True
        for i in idx:
            dx, dy = vecs[i]
            x += dx
            y += dy
            if x < 0 or y < 0:
                ok = False
                break
        if ok and (x, y) == end:
            return LatticeWalk(s, tuple(start), idx.astype(np.int64)), attempt
    raise WalkError(f"rejection sampler exhausted {max_attempts} attempts")


# states = length * positions; beyond this the backward table is too large
_DP_STATE_CAP = 3_000_000


def sample_excursion(s: StepSet, length: int, start, end, rng) -> LatticeWalk:
    """Exactly uniform quadrant excursion start->end of given length."""
    if length < 0:
        raise WalkError("length must be >= 0")
    if s.name == "mullin" and tuple(start) == (0, 0) and tuple(end) == (0, 0):
        if length % 2:
            raise WalkError("empty-set error: no excursions with these parameters")
        return _sample_mullin_excursion(length, rng)
    if length * (length + 2) ** 2 // 4 <= _DP_STATE_CAP:
        return sample_excursion_dp(s, length, start, end, rng)
    walk, _ = sample_excursion_rejection(s, length, start, end, rng)
    return walk


# -- statistics --------------------------------------------------------------


def step_correlation(s: StepSet) -> float:
    """Pearson correlation of the coordinates of a uniformly random step."""
    v = np.asarray(s.steps, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    cx, cy = x - x.mean(), y - y.mean()
    vx, vy = (cx**2).mean(), (cy**2).mean()
    if vx == 0 or vy == 0:
        raise WalkError("degenerate variance: a coordinate is constant")
    return float((cx * cy).mean() / math.sqrt(vx * vy))


def coordinate_variances(s: StepSet):
    v = np.asarray(s.steps, dtype=np.float64)
    return float(((v[:, 0] - v[:, 0].mean()) ** 2).mean()), \
        float(((v[:, 1] - v[:, 1].mean()) ** 2).mean())


def rescale_walk(w: LatticeWalk):
    """Diffusively rescaled path: time in [0,1], coordinates / sqrt(len * var).

    Returns (t, X, Y) arrays of length len(w)+1.
    """
    if len(w) == 0:
        raise WalkError("walk must be nonempty")
    pos = w.positions().astype(np.float64)
    vx, vy = coordinate_variances(w.step_set)
    m = len(w)
    t = np.linspace(0.0, 1.0, m + 1)
    return t, pos[:, 0] / math.sqrt(m * vx), pos[:, 1] / math.sqrt(m * vy)


def sample_correlated_bm(rho: float, n: int, dt: float, rng,
                         start=(0.0, 0.0)) -> BrownianPair:
    """Brownian pair with per-step increment covariance dt*[[1,rho],[rho,1]]."""
    if not (-1.0 < rho < 1.0):
        raise WalkError("invalid rho: need rho in (-1, 1)")
    if n < 1 or dt <= 0:
        raise WalkError("need n >= 1 and dt > 0")
    z = rng.standard_normal((n, 2))
    incL = z[:, 0]
    incR = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
    s = math.sqrt(dt)
    L = np.concatenate([[start[0]], start[0] + np.cumsum(s * incL)])
    R = np.concatenate([[start[1]], start[1] + np.cumsum(s * incR)])
    return BrownianPair(dt=dt, L=L, R=R, rho=rho)


# -- serialization -----------------------------------------------------------


def walk_to_text(w: LatticeWalk) -> str:
    head = f"WALK v1 {w.step_set.name} {w.start[0]} {w.start[1]}"
    body = " ".join(str(int(i)) for i in w.steps)
    return head + "\n" + body + "\n"


def walk_from_text(text: str) -> LatticeWalk:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["WALK", "v1"]:
        raise WalkError("bad WALK header")
    s = step_set_by_name(head[2])
    start = (int(head[3]), int(head[4]))
    steps = [int(tok) for tok in lines[1].split()] if len(lines) > 1 else []
    return LatticeWalk(s, start, np.asarray(steps, dtype=np.int64))


def rescaled_to_csv(w: LatticeWalk) -> str:
    t, X, Y = rescale_walk(w)
    lines = ["t,L,R"]
    for i in range(len(t)):
        lines.append(f"{t[i]:.10g},{X[i]:.10g},{Y[i]:.10g}")
    return "\n".join(lines) + "\n"
