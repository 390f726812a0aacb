"""Pointwise log-concavity verification on computed eigenfunctions.

For the ground state v > 0 and a parameter lam >= 0, the field of interest is
the symmetric matrix

    M = -Hess_g(log v) - lam * |grad log v|_g * I

in an orthonormal frame: v is lam-log-concave where M is positive
semi-definite.  Hessians are centered finite differences on the solver grid,
corrected by the connection coefficients of the conformal metric and rescaled
to the orthonormal frame.  Points inside a boundary layer are excluded (the
logarithm degenerates there); the layer itself is covered by the separate
tangential boundary criterion min kappa - lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import StarDomain
from .eigen2d import DiskGrid, EigenSolution
from .errors import EmptyInterior, NonFinite
from .hypgeom import curve_geometry

DEFAULT_V_FLOOR = 1e-3
DELTA_CELLS = 5  # default boundary margin in grid cells
PSD_TOL_FACTOR = 1e-2


@dataclass(frozen=True)
class ConcavityField:
    """Condition matrix M = -H - lam*w*I over the filtered interior."""

    lam: float
    mu1: float
    delta: float
    v_floor: float
    points: np.ndarray          # (M, 2) disk coordinates
    w: np.ndarray               # |grad log v| in the metric, per point
    h11: np.ndarray             # orthonormal-frame Hessian of log v
    h12: np.ndarray
    h22: np.ndarray
    min_eig_local: np.ndarray   # smallest eigenvalue of M per point
    min_eig: float
    min_eig_location: tuple
    trace_residual_sup: float
    psd_tolerance: float        # recorded with every verdict

    @property
    def numerically_psd(self) -> bool:
        return bool(self.min_eig >= -self.psd_tolerance)


@dataclass(frozen=True)
class ResidualReport:
    mu1: float
    pde_residual_sup: float
    mu1_strong_regime: bool     # mu1 >= 10 n^2 with n = 2
    n_points: int
    delta: float
    v_floor: float


def default_delta(grid: DiskGrid) -> float:
    """Five grid cells of hyperbolic length at the boundary's metric scale."""
    s = np.hypot(grid.boundary_pts[:, 0], grid.boundary_pts[:, 1])
    rho_c_max = float(np.max(2.0 / (1.0 - s**2)))
    return DELTA_CELLS * grid.h * rho_c_max


def boundary_distance(grid: DiskGrid, points: np.ndarray) -> np.ndarray:
    """Hyperbolic distance from each point to the sampled boundary."""
    bpts = grid.boundary_pts
    out = np.empty(len(points))
    nrm_b = 1.0 - (bpts**2).sum(axis=1)
    for start in range(0, len(points), 4000):
        chunk = points[start : start + 4000]
        nrm_p = 1.0 - (chunk**2).sum(axis=1)
        d2 = ((chunk[:, None, :] - bpts[None, :, :]) ** 2).sum(axis=-1)
        arg = 1.0 + 2.0 * d2 / (nrm_p[:, None] * nrm_b[None, :])
        out[start : start + 4000] = np.arccosh(np.maximum(arg, 1.0)).min(axis=1)
    return out


def _stencil_ids(grid: DiskGrid):
    """Node ids of the full 3x3 neighborhood, -1 where missing."""
    lat = grid.lattice
    i = grid.ij[:, 0]
    j = grid.ij[:, 1]
    side = lat.shape[0]

    def look(di, dj):
        ii = i + di
        jj = j + dj
        ok = (ii >= 0) & (ii < side) & (jj >= 0) & (jj < side)
        return np.where(ok, lat[np.clip(ii, 0, side - 1), np.clip(jj, 0, side - 1)], -1)

    east, west = look(1, 0), look(-1, 0)
    north, south = look(0, 1), look(0, -1)
    ne, nw = look(1, 1), look(-1, 1)
    se, sw = look(1, -1), look(-1, -1)
    return east, west, north, south, ne, nw, se, sw


def log_field_derivatives(grid: DiskGrid, values: np.ndarray, mask: np.ndarray):
    """Centered first/second differences of log(values) at masked nodes.

    The mask must only select nodes whose full 3x3 neighborhood exists and
    carries positive values.
    """
    L = np.where(values > 0.0, np.log(np.maximum(values, 1e-300)), np.nan)
    e, w_, n_, s, ne, nw, se, sw = _stencil_ids(grid)
    h = grid.h
    sel = np.flatnonzero(mask)
    L1 = (L[e[sel]] - L[w_[sel]]) / (2.0 * h)
    L2 = (L[n_[sel]] - L[s[sel]]) / (2.0 * h)
    L11 = (L[e[sel]] - 2.0 * L[sel] + L[w_[sel]]) / h**2
    L22 = (L[n_[sel]] - 2.0 * L[sel] + L[s[sel]]) / h**2
    L12 = (L[ne[sel]] - L[nw[sel]] - L[se[sel]] + L[sw[sel]]) / (4.0 * h**2)
    parts = (L1, L2, L11, L12, L22)
    if any(not np.all(np.isfinite(p)) for p in parts):
        raise NonFinite("log field produced non-finite derivatives")
    return sel, parts


def covariant_log_hessian(grid: DiskGrid, values: np.ndarray, mask: np.ndarray):
    """Orthonormal-frame covariant Hessian of log(values) and gradient norm.

    Connection correction for the conformal metric (sigma_i = rho_c x_i):
        Hess_11 = L11 - sigma_1 L1 + sigma_2 L2
        Hess_12 = L12 - sigma_2 L1 - sigma_1 L2
        Hess_22 = L22 + sigma_1 L1 - sigma_2 L2
    then division by rho_c^2 (Hessian) and rho_c (gradient).
    """
    sel, (L1, L2, L11, L12, L22) = log_field_derivatives(grid, values, mask)
    rho_c = np.sqrt(grid.weights[sel])
    sig1 = rho_c * grid.x[sel]
    sig2 = rho_c * grid.y[sel]
    hc11 = L11 - sig1 * L1 + sig2 * L2
    hc12 = L12 - sig2 * L1 - sig1 * L2
    hc22 = L22 + sig1 * L1 - sig2 * L2
    rc2 = grid.weights[sel]
    h11 = hc11 / rc2
    h12 = hc12 / rc2
    h22 = hc22 / rc2
    w = np.hypot(L1, L2) / rho_c
    return sel, h11, h12, h22, w


def evaluation_mask(
    solution: EigenSolution, delta: float, v_floor: float
) -> np.ndarray:
    """Interior nodes with a full positive stencil, value above the floor and
    hyperbolic distance at least delta from the boundary."""
    grid = solution.grid
    v = solution.eigenvectors[:, 0]
    e, w_, n_, s, ne, nw, se, sw = _stencil_ids(grid)
    have_all = (
        (e >= 0) & (w_ >= 0) & (n_ >= 0) & (s >= 0)
        & (ne >= 0) & (nw >= 0) & (se >= 0) & (sw >= 0)
    )
    positive_stencil = have_all.copy()
    for ids in (e, w_, n_, s, ne, nw, se, sw):
        positive_stencil &= np.where(ids >= 0, v[np.maximum(ids, 0)] > 0.0, False)
    mask = positive_stencil & (v >= v_floor * v.max())
    if np.any(mask):
        pts = np.stack([grid.x, grid.y], axis=1)
        dist = np.full(len(v), -1.0)
        dist[mask] = boundary_distance(grid, pts[mask])
        mask &= dist >= delta
    if not np.any(mask):
        raise EmptyInterior(
            f"no evaluation points survive delta={delta:.3g}, v_floor={v_floor:.1e}"
        )
    return mask


def concavity_field(
    solution: EigenSolution,
    lam: float,
    delta: float | None = None,
    v_floor: float = DEFAULT_V_FLOOR,
) -> ConcavityField:
    """Evaluate the condition matrix of lam-log-concavity on the interior."""
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    if not (0.0 < v_floor < 1.0):
        raise ValueError("v_floor must lie in (0, 1)")
    grid = solution.grid
    if delta is None:
        delta = default_delta(grid)
    if delta < 3.0 * grid.h * 2.0:  # three cells at the minimal metric scale
        raise ValueError("delta below three grid cells of hyperbolic length")
    v = solution.eigenvectors[:, 0]
    mask = evaluation_mask(solution, delta, v_floor)
    sel, h11, h12, h22, w = covariant_log_hessian(grid, v, mask)

    m11 = -h11 - lam * w
    m12 = -h12
    m22 = -h22 - lam * w
    half_tr = 0.5 * (m11 + m22)
    radius = np.sqrt(0.25 * (m11 - m22) ** 2 + m12**2)
    min_eig_local = half_tr - radius

    imin = int(np.argmin(min_eig_local))
    mu1 = solution.mu1
    # trace identity: sum of Lambda = mu1 + w^2 - n*w with Lambda = -H - w*I
    trace_lambda = -(h11 + h22) - 2.0 * w
    trace_residual = np.abs(trace_lambda - (mu1 + w**2 - 2.0 * w))

    return ConcavityField(
        lam=lam,
        mu1=mu1,
        delta=float(delta),
        v_floor=v_floor,
        points=np.stack([grid.x[sel], grid.y[sel]], axis=1),
        w=w,
        h11=h11,
        h12=h12,
        h22=h22,
        min_eig_local=min_eig_local,
        min_eig=float(min_eig_local[imin]),
        min_eig_location=(float(grid.x[sel][imin]), float(grid.y[sel][imin])),
        trace_residual_sup=float(trace_residual.max()),
        psd_tolerance=PSD_TOL_FACTOR * mu1,
    )


def pde_residual(
    solution: EigenSolution,
    delta: float | None = None,
    v_floor: float = DEFAULT_V_FLOOR,
) -> ResidualReport:
    """Sup-norm residual of Lap_g(-log v) = mu1 + |grad(-log v)|^2."""
    grid = solution.grid
    if delta is None:
        delta = default_delta(grid)
    v = solution.eigenvectors[:, 0]
    mask = evaluation_mask(solution, delta, v_floor)
    sel, (L1, L2, L11, L12, L22) = log_field_derivatives(grid, v, mask)
    rc2 = grid.weights[sel]
    lap_u = -(L11 + L22) / rc2          # u = -log v
    w2 = (L1**2 + L2**2) / rc2
    residual = np.abs(lap_u - solution.mu1 - w2)
    return ResidualReport(
        mu1=solution.mu1,
        pde_residual_sup=float(residual.max()),
        mu1_strong_regime=bool(solution.mu1 >= 10.0 * 2**2),
        n_points=int(mask.sum()),
        delta=float(delta),
        v_floor=v_floor,
    )


def boundary_criterion(domain: StarDomain, lam: float, n_samples: int = 1024) -> float:
    """min_theta kappa - lam: positive means the boundary layer satisfies the
    tangential condition for strict lam-convexity."""
    geom = curve_geometry(domain, n_samples)
    return float(np.min(geom.kappa) - lam)
