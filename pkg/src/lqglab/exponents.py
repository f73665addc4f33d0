"""Exact parameter relations and exponent targets.

Central-charge bookkeeping (c_L = 1 + 6Q^2, c_M = 26 - c_L with
Q = 2/gamma + gamma/2), the mating correlation -cos(4*pi/kappa), conformal
weights, the backbone-exponent root, and Monte-Carlo arm exponents for
critical site percolation on the triangular lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


class ExponentError(ValueError):
    pass


@dataclass(frozen=True)
class ChargeTriple:
    gamma: float
    Q: float
    c_L: float
    c_M: float
    kappa_small: float
    kappa_large: float

    def validate(self, tol=1e-12):
        # scale by the magnitude entering each identity: c_L grows like
        # 24/gamma^2, where an absolute 1e-12 would dip below one ulp
        s = max(1.0, abs(self.c_L))
        ok = (abs(self.c_L - (1 + 6 * self.Q ** 2)) < tol * s
              and abs(self.c_M + self.c_L - 26) < tol * s
              and abs(self.Q - (2 / self.gamma + self.gamma / 2)) < tol * max(1.0, self.Q)
              and abs(self.kappa_small * self.kappa_large - 16) < tol * 16
              and self.Q >= 2 - tol)
        if not ok:
            raise ExponentError("charge identities violated")
        return True


def charges_from_gamma(gamma: float) -> ChargeTriple:
    if not (0 < gamma <= 2):
        raise ExponentError("gamma must lie in (0, 2]")
    q = 2.0 / gamma + gamma / 2.0
    c_l = 1.0 + 6.0 * q * q
    return ChargeTriple(gamma=gamma, Q=q, c_L=c_l, c_M=26.0 - c_l,
                        kappa_small=gamma * gamma, kappa_large=16.0 / (gamma * gamma))


def gamma_from_cM(c_m: float) -> float:
    """The root gamma in (0, 2] of 1 + 6(gamma/2 + 2/gamma)^2 = 26 - c_m."""
    if c_m > 1:
        raise ExponentError("no gamma in (0,2] for matter charge > 1")
    q = math.sqrt((25.0 - c_m) / 6.0)
    return q - math.sqrt(q * q - 4.0)


def mot_correlation(kappa: float) -> float:
    """Correlation of the mating-of-trees coordinates, -cos(4*pi/kappa)."""
    if kappa <= 4:
        raise ExponentError("mating correlation requires kappa > 4")
    return -math.cos(4.0 * math.pi / kappa)


def conformal_weight(alpha: float, gamma: float) -> float:
    q = charges_from_gamma(gamma).Q
    return (alpha / 2.0) * (q - alpha / 2.0)


# -- backbone exponent ---------------------------------------------------------


def backbone_function(x: float) -> float:
    return math.sqrt(36.0 * x + 3.0) / 4.0 + math.sin(2.0 * math.pi * math.sqrt(12.0 * x + 1.0) / 3.0)


def backbone_sign_scan(n: int = 10_000):
    """Sign changes of the backbone function on the open interval (1/4, 2/3).

    x = 1/4 is itself a root (the two-arm value), so the scan starts
    strictly inside; returns the list of bracketing intervals.
    """
    xs = 0.25 + (2.0 / 3.0 - 0.25) * (np.arange(1, n + 1) / (n + 1))
    vals = np.array([backbone_function(x) for x in xs])
    sgn = np.sign(vals)
    changes = []
    for k in range(len(xs) - 1):
        if sgn[k] != 0 and sgn[k + 1] != 0 and sgn[k] != sgn[k + 1]:
            changes.append((float(xs[k]), float(xs[k + 1])))
    return changes


def backbone_exponent(tol: float = 1e-12) -> float:
    """Bisection root of the backbone equation in (1/4, 2/3).

    Stops when both the bracket width and the midpoint residual are below
    tol (or at float resolution, whichever comes first).
    """
    if tol <= 0:
        raise ExponentError("tol must be positive")
    changes = backbone_sign_scan(2048)
    if len(changes) != 1:
        raise ExponentError("expected exactly one sign change in (1/4, 2/3)")
    a, b = changes[0]
    fa = backbone_function(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = backbone_function(mid)
        if fm == 0.0:
            return mid
        if (fa < 0) != (fm < 0):
            b = mid
        else:
            a, fa = mid, fm
        if b - a <= tol and abs(fm) < tol:
            break
        if mid == 0.5 * (a + b):  # bracket no longer splits in float
            break
    return 0.5 * (a + b)


# -- arm exponents by Monte Carlo ---------------------------------------------


@dataclass
class ArmEstimate:
    exponent: float
    stderr: float
    annuli: list
    trials: int
    p_hat: list = field(default_factory=list)
    p_stderr: list = field(default_factory=list)

    def __post_init__(self):
        if self.stderr <= 0:
            raise ExponentError("stderr must be positive")
        for (r1, R1), (r2, R2) in zip(self.annuli, self.annuli[1:]):
            if not (r1 <= r2 and R1 <= R2):
                raise ExponentError("annuli must be nested")


def _triangular_radii(rmax: float):
    """Euclidean radii of the sheared triangular-lattice embedding, on an
    index box just covering the disk of radius rmax."""
    half_j = int(math.ceil(2.0 * rmax / math.sqrt(3))) + 2
    half_i = int(math.ceil(rmax + rmax / math.sqrt(3))) + 2
    ii = np.arange(-half_i, half_i + 1)[:, None]
    jj = np.arange(-half_j, half_j + 1)[None, :]
    x = ii + 0.5 * jj
    y = (math.sqrt(3) / 2.0) * jj
    return np.hypot(x, y)

_TRI_STRUCTURE = np.array([[0, 1, 1],
                           [1, 1, 1],
                           [1, 1, 0]], dtype=bool)


def arm_exponent_mc(arm_type: str, radii, trials: int, rng,
                    p: float = 0.5, n_blocks: int = 20) -> ArmEstimate:
    """Arm-event decay exponent on triangular-lattice annuli.

    One percolation sample per trial serves every outer radius: the cluster
    of the inner rim is labeled inside the largest annulus and the radii it
    reaches give all the crossing indicators at once.  The exponent is the
    negated slope of log p against log(R/r); its standard error comes from
    a seed-block bootstrap over trial blocks.
    """
    if arm_type not in ("one-arm-blue", "two-arm-bichromatic"):
        raise ExponentError(f"unknown arm type {arm_type!r}")
    radii = sorted(int(r) for r in radii)
    if len(radii) < 3:
        raise ExponentError("insufficient radii: need the inner radius "
                            "plus at least two outer radii for the fit")
    r_in, outs = radii[0], radii[1:]
    rad = _triangular_radii(radii[-1] + 1.0)
    annulus = (rad >= r_in) & (rad <= radii[-1] + 1.0)
    rim_flat = np.flatnonzero(annulus & (rad <= r_in + 1.0))
    ann_flat = np.flatnonzero(annulus)
    rad_flat = rad.ravel()[ann_flat]
    shape = rad.shape

    def reach_radius(open_annulus):
        """Largest radius reached by any open cluster touching the inner rim."""
        mask = np.zeros(shape, dtype=bool)
        mask.ravel()[ann_flat] = open_annulus
        labels, nlab = ndimage.label(mask, structure=_TRI_STRUCTURE)
        lab_flat = labels.ravel()
        rim_labels = np.unique(lab_flat[rim_flat])
        rim_labels = rim_labels[rim_labels > 0]
        if len(rim_labels) == 0:
            return 0.0
        acc = np.zeros(nlab + 1)
        np.maximum.at(acc, lab_flat[ann_flat], rad_flat)
        return float(acc[rim_labels].max())

    hits = np.zeros((trials, len(outs)), dtype=bool)
    for t in range(trials):
        u = rng.random(len(ann_flat))
        blue = u < p
        reach = reach_radius(blue)
        if arm_type == "two-arm-bichromatic":
            reach = min(reach, reach_radius(~blue))
        hits[t] = [reach >= R for R in outs]

    p_hat = hits.mean(axis=0)
    if np.any(p_hat == 0):
        raise ExponentError("no crossing events at some radius; "
                            "increase trials or shrink radii")
    logs = np.log(np.asarray(outs, dtype=np.float64) / r_in)
    slope = np.polyfit(logs, np.log(p_hat), 1)[0]

    blocks = np.array_split(np.arange(trials), n_blocks)
    boot = []
    for _ in range(200):
        pick = rng.integers(0, n_blocks, size=n_blocks)
        rows = np.concatenate([blocks[i] for i in pick])
        ph = hits[rows].mean(axis=0)
        if np.any(ph == 0):
            continue
        boot.append(np.polyfit(logs, np.log(ph), 1)[0])
    stderr = float(np.std(boot, ddof=1)) if len(boot) > 1 else 1e-9
    p_se = np.sqrt(p_hat * (1 - p_hat) / trials)
    return ArmEstimate(exponent=float(-slope), stderr=max(stderr, 1e-9),
                       annuli=[(r_in, R) for R in outs], trials=trials,
                       p_hat=p_hat.tolist(), p_stderr=p_se.tolist())
