"""Discrete Gaussian free fields, circle averages, and multiplicative-chaos
measures on masked square grids.

Normalization: the field covariance is 2*pi times the inverse lattice
Laplacian, which matches the log(1/r) short-distance behaviour of the
continuum Green's function (without the 2*pi the log coefficient would be
1/(2*pi)).  Zero-boundary fields vanish off the mask; free and whole-plane
variants are defined modulo constants and pinned by forcing the mask
average to zero, with the additive constant exposed as an explicit
argument downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import factorized


class FieldError(ValueError):
    pass


@dataclass
class GridField:
    mesh: float
    mask: np.ndarray          # boolean (ny, nx)
    values: np.ndarray        # float (ny, nx), zero off the mask
    boundary: str             # zero | free-pinned | whole-plane-pinned
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.mask.shape:
            raise FieldError("values and mask shapes differ")
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field values must be finite")
        if self.boundary not in ("zero", "free-pinned", "whole-plane-pinned"):
            raise FieldError(f"unknown boundary tag {self.boundary!r}")
        if np.any(self.values[~self.mask] != 0.0):
            raise FieldError("values must vanish off the mask")

    def site_xy(self):
        """(x, y) coordinates of every grid node (mesh spacing, origin offset)."""
        ny, nx = self.mask.shape
        ys, xs = np.mgrid[0:ny, 0:nx]
        return (self.origin[0] + xs * self.mesh, self.origin[1] + ys * self.mesh)

    def copy_with(self, values):
        return GridField(self.mesh, self.mask, values, self.boundary, self.origin)


@dataclass(frozen=True)
class Insertion:
    location: tuple     # (x, y)
    charge: float


@dataclass(frozen=True)
class LqgParams:
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.gamma <= 2.0):
            raise FieldError("gamma must lie in (0, 2]")

    @property
    def Q(self) -> float:
        return 2.0 / self.gamma + self.gamma / 2.0


# -- Laplacians and covariance oracles ---------------------------------------


def _site_index(mask):
    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(mask.sum())
    return idx


def _laplacian(mask, boundary):
    """Graph Laplacian on masked sites; zero-boundary couples to the walls."""
    idx = _site_index(mask)
    n = int(mask.sum())
    ny, nx = mask.shape
    rows, cols, vals = [], [], []
    deg = np.zeros(n)
    ys, xs = np.nonzero(mask)
    for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        yn, xn = ys + dy, xs + dx
        inside = (yn >= 0) & (yn < ny) & (xn >= 0) & (xn < nx)
        nb_mask = np.zeros(len(ys), dtype=bool)
        nb_mask[inside] = mask[yn[inside], xn[inside]]
        if boundary == "zero":
            deg += 1.0  # off-mask neighbors pin the field to zero
        else:
            deg += nb_mask
        src = idx[ys[nb_mask], xs[nb_mask]]
        dst = idx[yn[nb_mask], xn[nb_mask]]
        rows.append(src)
        cols.append(dst)
        vals.append(-np.ones(len(src)))
    rows = np.concatenate(rows + [np.arange(n)])
    cols = np.concatenate(cols + [np.arange(n)])
    vals = np.concatenate(vals + [deg])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


class CovarianceOracle:
    """Exact covariance of the sampled fields: apply, entries, quadratic forms.

    Backed by a sparse factorization of the Laplacian; for pinned variants
    the zero-mean projection is applied on both sides.
    """

    def __init__(self, field_or_mask, boundary="zero"):
        if isinstance(field_or_mask, GridField):
            mask, boundary = field_or_mask.mask, field_or_mask.boundary
        else:
            mask = np.asarray(field_or_mask, dtype=bool)
        self.mask = mask
        self.boundary = boundary
        self.n = int(mask.sum())
        lap = _laplacian(mask, boundary)
        if boundary == "zero":
            self._solve = factorized(lap.tocsc())
        else:
            # pinned: invert on the zero-mean subspace via a rank-one shift
            shift = lap + sparse.csr_matrix(np.full((self.n, self.n), 1.0 / self.n))
            self._solve = factorized(sparse.csc_matrix(shift))
        self.idx = _site_index(mask)

    def apply(self, w):
        """Covariance times a weight vector over masked sites."""
        w = np.asarray(w, dtype=np.float64)
        if self.boundary == "zero":
            return 2.0 * math.pi * self._solve(w)
        w0 = w - w.mean()
        u = self._solve(w0)
        return 2.0 * math.pi * (u - u.mean())

    def quad(self, w):
        """Variance of the linear functional sum_i w_i h_i."""
        return float(np.dot(np.asarray(w), self.apply(w)))

    def entry(self, site_a, site_b):
        """Covariance between two (row, col) sites."""
        w = np.zeros(self.n)
        w[self.idx[site_a]] = 1.0
        col = self.apply(w)
        return float(col[self.idx[site_b]])

    def kernel_column(self, site):
        """Covariance of every masked site with the given (row, col) site."""
        w = np.zeros(self.n)
        w[self.idx[site]] = 1.0
        return self.apply(w)


_CHOL_CACHE: dict = {}


def _dense_chol(mask, boundary):
    key = (mask.tobytes(), mask.shape, boundary)
    hit = _CHOL_CACHE.get(key)
    if hit is not None:
        return hit
    n = int(mask.sum())
    lap = _laplacian(mask, boundary).toarray()
    if boundary == "zero":
        cov = 2.0 * math.pi * np.linalg.inv(lap)
    else:
        # pseudo-inverse on the zero-mean subspace
        evals, evecs = np.linalg.eigh(lap)
        if evals[0] > 1e-9:
            raise FieldError("singular system expected for free field")
        if evals[1] < 1e-12:
            raise FieldError("singular system: Laplacian kernel too large")
        inv = (evecs[:, 1:] / evals[1:]) @ evecs[:, 1:].T
        cov = 2.0 * math.pi * inv
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(n))
    if len(_CHOL_CACHE) > 8:
        _CHOL_CACHE.clear()
    _CHOL_CACHE[key] = chol
    return chol


def sample_dgff(mask, boundary, mesh, rng, dense_cap: int = 10_000) -> GridField:
    """Exact Gaussian field with covariance 2*pi*(inverse Laplacian).

    Dense Cholesky of the covariance for <= dense_cap sites (factor cached
    per mask); above that, zero-boundary fields on full rectangles are
    drawn through the fast sine transform (the exact eigenbasis), other
    cases are refused.
    """
    mask = np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        raise FieldError("mask is empty")
    if not _mask_connected(mask):
        raise FieldError("mask must be connected")
    if n <= dense_cap:
        vals = _dense_chol(mask, boundary) @ rng.standard_normal(n)
    else:
        if boundary != "zero" or not mask.all():
            raise FieldError("fast sampling needs a zero-boundary full rectangle")
        vals = _sample_dst_rectangle(mask.shape, rng)
    if boundary != "zero":
        vals = vals - vals.mean()
    field = np.zeros(mask.shape)
    field[mask] = vals
    return GridField(mesh, mask, field, boundary)


def _sample_dst_rectangle(shape, rng):
    from scipy.fft import dstn, idstn

    ny, nx = shape
    jj = np.arange(1, ny + 1)[:, None]
    kk = np.arange(1, nx + 1)[None, :]
    lam = (4 * np.sin(jj * math.pi / (2 * (ny + 1))) ** 2
           + 4 * np.sin(kk * math.pi / (2 * (nx + 1))) ** 2)
    z = rng.standard_normal((ny, nx))
    coeff = z * np.sqrt(2.0 * math.pi / lam)
    vals = idstn(coeff, type=1, norm="ortho")
    return vals.ravel()


def _mask_connected(mask):
    from scipy.ndimage import label

    _, k = label(mask)
    return k == 1


# -- circle averages ----------------------------------------------------------


def circle_stencil(field: GridField, z, eps):
    """Arc-length weights over masked sites approximating the eps-circle at z.

    Returns a weight vector over masked sites (summing to one).  Raises if
    any circle sample snaps outside the mask.
    """
    ny, nx = field.mask.shape
    k = max(16, int(4 * math.ceil(2 * math.pi * eps / field.mesh)))
    thetas = (np.arange(k) + 0.5) * (2 * math.pi / k)
    px = z[0] + eps * np.cos(thetas)
    py = z[1] + eps * np.sin(thetas)
    ix = np.rint((px - field.origin[0]) / field.mesh).astype(int)
    iy = np.rint((py - field.origin[1]) / field.mesh).astype(int)
    if np.any((ix < 0) | (ix >= nx) | (iy < 0) | (iy >= ny)):
        raise FieldError("circle exits domain")
    if not np.all(field.mask[iy, ix]):
        raise FieldError("circle exits domain")
    idx = _site_index(field.mask)
    w = np.zeros(int(field.mask.sum()))
    np.add.at(w, idx[iy, ix], 1.0 / k)
    return w


def circle_average(field: GridField, z, eps) -> float:
    """Average of the field over the discretized eps-circle around z."""
    w = circle_stencil(field, z, eps)
    return float(np.dot(w, field.values[field.mask]))


def circle_average_field(field: GridField, eps):
    """h_eps at every cell center whose circle fits; (values, valid-mask).

    Computed by convolution with the arc-length stencil; cells whose circle
    leaves the mask are flagged invalid and excluded from measures.
    """
    from scipy.ndimage import convolve

    r = eps / field.mesh
    k = max(16, int(4 * math.ceil(2 * math.pi * r)))
    thetas = (np.arange(k) + 0.5) * (2 * math.pi / k)
    dx = np.rint(r * np.cos(thetas)).astype(int)
    dy = np.rint(r * np.sin(thetas)).astype(int)
    rad = int(np.max(np.abs(np.concatenate([dx, dy]))))
    kern = np.zeros((2 * rad + 1, 2 * rad + 1))
    np.add.at(kern, (rad + dy, rad + dx), 1.0 / k)
    vals = convolve(field.values, kern, mode="constant", cval=0.0)
    hits = convolve(field.mask.astype(float), kern, mode="constant", cval=0.0)
    valid = field.mask & (hits > 1.0 - 1e-9)
    return vals, valid


# -- GMC measures --------------------------------------------------------------


def gmc_area(field: GridField, params: LqgParams, eps):
    """Cell measure eps^(gamma^2/2) * exp(gamma*h_eps(center)) * mesh^2.

    Returns (masses, valid) arrays over the grid; cells whose eps-circle
    does not fit inside the mask carry no mass.
    """
    if eps < field.mesh:
        raise FieldError("eps must be at least the mesh size")
    g = params.gamma
    h, valid = circle_average_field(field, eps)
    masses = np.zeros(field.mask.shape)
    masses[valid] = eps ** (g * g / 2.0) * np.exp(g * h[valid]) * field.mesh ** 2
    return masses, valid


def gmc_area_mean(oracle: CovarianceOracle, field: GridField, params, eps):
    """Exact expectation of the total gmc_area mass (lognormal identity)."""
    g = params.gamma
    _, valid = circle_average_field(field, eps)
    total = 0.0
    ys, xs = np.nonzero(valid)
    for y, x in zip(ys, xs):
        z = (field.origin[0] + x * field.mesh, field.origin[1] + y * field.mesh)
        var = oracle.quad(circle_stencil(field, z, eps))
        total += eps ** (g * g / 2.0) * math.exp(g * g * var / 2.0) * field.mesh ** 2
    return total


def boundary_sites(field: GridField):
    """Masked sites with an off-mask 4-neighbor (the discrete boundary)."""
    m = field.mask
    padded = np.pad(m, 1, constant_values=False)
    nb = (padded[:-2, 1:-1] & padded[2:, 1:-1]
          & padded[1:-1, :-2] & padded[1:-1, 2:])
    return m & ~nb


def gmc_boundary(field: GridField, params: LqgParams, eps):
    """Boundary measure eps^(gamma^2/4)*exp((gamma/2)*h_eps)*mesh per cell.

    h_eps at a boundary site averages over the part of the circle inside
    the mask (weights renormalized); one-dimensional cells of length mesh.
    """
    if eps < field.mesh:
        raise FieldError("eps must be at least the mesh size")
    g = params.gamma
    bs = boundary_sites(field)
    masses = np.zeros(field.mask.shape)
    ys, xs = np.nonzero(bs)
    for y, x in zip(ys, xs):
        w = _partial_circle_weights(field, (y, x), eps)
        h = float(np.dot(w, field.values[field.mask]))
        masses[y, x] = eps ** (g * g / 4.0) * math.exp(0.5 * g * h) * field.mesh
    return masses, bs


def _partial_circle_weights(field, site, eps):
    ny, nx = field.mask.shape
    y0, x0 = site
    k = max(16, int(4 * math.ceil(2 * math.pi * eps / field.mesh)))
    thetas = (np.arange(k) + 0.5) * (2 * math.pi / k)
    ix = np.rint(x0 + (eps / field.mesh) * np.cos(thetas)).astype(int)
    iy = np.rint(y0 + (eps / field.mesh) * np.sin(thetas)).astype(int)
    ok = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
    ok[ok] = field.mask[iy[ok], ix[ok]]
    if not ok.any():
        raise FieldError("circle exits domain")
    idx = _site_index(field.mask)
    w = np.zeros(int(field.mask.sum()))
    np.add.at(w, idx[iy[ok], ix[ok]], 1.0)
    return w / w.sum()


def gmc_boundary_mean(oracle: CovarianceOracle, field: GridField, params, eps):
    """Exact expectation of the total gmc_boundary mass."""
    g = params.gamma
    bs = boundary_sites(field)
    total = 0.0
    ys, xs = np.nonzero(bs)
    for y, x in zip(ys, xs):
        w = _partial_circle_weights(field, (y, x), eps)
        var = oracle.quad(w)
        total += eps ** (g * g / 4.0) * math.exp(g * g * var / 8.0) * field.mesh
    return total


# -- Liouville fields ----------------------------------------------------------


def seiberg_check(charges, params: LqgParams) -> bool:
    """Strict Seiberg bounds: every charge below Q and total above 2Q."""
    q = params.Q
    charges = list(charges)
    return all(a < q for a in charges) and sum(charges) > 2 * q


def liouville_field(base: GridField, params: LqgParams, insertions,
                    c: float = 0.0,
                    oracle: CovarianceOracle | None = None) -> GridField:
    """Base field plus insertion kernels, the radial profile, and a constant.

    Each insertion adds charge * K(., z_i) with K the discrete covariance
    kernel of the base field's boundary type; whole-plane and free fields
    additionally carry the -2Q*log|z|_+ profile.  The c-weight prefactor of
    the underlying infinite measure is left to the caller.
    """
    locs = [tuple(i.location) for i in insertions]
    if len(set(locs)) != len(locs):
        raise FieldError("insertion collision: locations must be distinct")
    if oracle is None and insertions:
        oracle = CovarianceOracle(base)
    vals = base.values.copy()
    mask = base.mask
    xs, ys = base.site_xy()
    if base.boundary in ("whole-plane-pinned", "free-pinned"):
        r = np.hypot(xs, ys)
        vals[mask] -= 2.0 * params.Q * np.log(np.maximum(r[mask], 1.0))
    for ins in insertions:
        iy = int(round((ins.location[1] - base.origin[1]) / base.mesh))
        ix = int(round((ins.location[0] - base.origin[0]) / base.mesh))
        if not (0 <= iy < mask.shape[0] and 0 <= ix < mask.shape[1]) \
                or not mask[iy, ix]:
            raise FieldError("insertion outside the field domain")
        vals[mask] += ins.charge * oracle.kernel_column((iy, ix))
    vals[mask] += c
    out = np.zeros_like(vals)
    out[mask] = vals[mask]
    return base.copy_with(out)


# -- coordinate change ---------------------------------------------------------


def coordinate_change(field: GridField, phi, params: LqgParams) -> GridField:
    """Push a field through a conformal map from the catalog.

    `phi` is ("identity",), ("scale", r), or ("mobius", a) for the disk
    automorphism z -> (z - a)/(1 - conj(a) z).  The rule
    h = h_tilde o phi + Q log|phi'| is solved for h_tilde on the image
    grid; affine maps are exact, the Mobius case resamples by nearest site.
    """
    kind = phi[0]
    if kind == "identity":
        return field.copy_with(field.values.copy())
    if kind == "scale":
        r = float(phi[1])
        if r <= 0:
            raise FieldError("unsupported map: scale factor must be positive")
        vals = np.where(field.mask, field.values - params.Q * math.log(r), 0.0)
        return GridField(field.mesh * r, field.mask, vals, field.boundary,
                         (field.origin[0] * r, field.origin[1] * r))
    if kind == "mobius":
        a = complex(phi[1])
        if abs(a) >= 1:
            raise FieldError("unsupported map: |a| must be < 1")
        xs, ys = field.site_xy()
        z = xs + 1j * ys
        w = (z - a) / (1 - np.conj(a) * z)
        dphi = (1 - abs(a) ** 2) / np.abs(1 - np.conj(a) * z) ** 2
        # resample onto the same grid in the image coordinates
        out_vals = np.zeros_like(field.values)
        out_mask = np.zeros_like(field.mask)
        inv_src = {}
        ny, nx = field.mask.shape
        for y, x in zip(*np.nonzero(field.mask)):
            ww = w[y, x]
            jx = int(round((ww.real - field.origin[0]) / field.mesh))
            jy = int(round((ww.imag - field.origin[1]) / field.mesh))
            if 0 <= jy < ny and 0 <= jx < nx:
                out_mask[jy, jx] = True
                out_vals[jy, jx] = field.values[y, x] - \
                    params.Q * math.log(dphi[y, x])
        return GridField(field.mesh, out_mask, out_vals, field.boundary,
                         field.origin)
    raise FieldError(f"unsupported map {kind!r}")
