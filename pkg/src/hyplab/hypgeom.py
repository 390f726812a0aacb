"""Hyperbolic-geometry primitives on the Poincare disk.

The unit-disk model with conformal factor 2/(1-|x|^2) has constant curvature
-1, so it matches the polar metric dr^2 + sinh^2(r) dtheta^2 through the
radius map s = tanh(r/2).  Everything here is a pure function; curve
quantities are evaluated on uniform angular grids with derivatives taken from
the exact Fourier representation of the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import StarDomain


class DiskPoint(NamedTuple):
    x1: float
    x2: float


class PolarPoint(NamedTuple):
    r: float
    theta: float


def conformal_factor_xy(x1, x2):
    """Vectorized conformal factor 2/(1 - |x|^2)."""
    s2 = np.asarray(x1) ** 2 + np.asarray(x2) ** 2
    return 2.0 / (1.0 - s2)


def conformal_factor(p) -> float:
    """Metric scale at a disk point; blows up toward the ideal boundary."""
    x1, x2 = p
    if x1 * x1 + x2 * x2 >= 1.0:
        raise ValueError("point outside model")
    return float(conformal_factor_xy(x1, x2))


def polar_to_disk(p) -> DiskPoint:
    """Map (r, theta) with hyperbolic radius r to disk coordinates."""
    r, theta = p
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    s = np.tanh(0.5 * r)
    return DiskPoint(float(s * np.cos(theta)), float(s * np.sin(theta)))


def disk_to_polar(p) -> PolarPoint:
    x1, x2 = p
    s = np.hypot(x1, x2)
    if s >= 1.0:
        raise ValueError("point outside model")
    r = 2.0 * np.arctanh(s)
    theta = np.arctan2(x2, x1) % (2.0 * np.pi) if s > 0.0 else 0.0
    return PolarPoint(float(r), float(theta))


def christoffel(p) -> np.ndarray:
    """Connection coefficients Gamma[k, i, j] of the disk metric at p.

    For the conformal metric with sigma = log(conformal factor) these are
    Gamma^k_ij = delta_ik sigma_j + delta_jk sigma_i - delta_ij sigma_k,
    and sigma_i = conformal_factor * x_i.
    """
    x1, x2 = p
    if x1 * x1 + x2 * x2 >= 1.0:
        raise ValueError("point outside model")
    rho_c = conformal_factor(p)
    sig = (rho_c * x1, rho_c * x2)
    gamma = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                val = 0.0
                if i == k:
                    val += sig[j]
                if j == k:
                    val += sig[i]
                if i == j:
                    val -= sig[k]
                gamma[k, i, j] = val
    return gamma


def hyperbolic_distance(p, q) -> float:
    """Geodesic distance between two disk points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    np2 = p @ p
    nq2 = q @ q
    if np2 >= 1.0 or nq2 >= 1.0:
        raise ValueError("point outside model")
    d2 = float((p - q) @ (p - q))
    arg = 1.0 + 2.0 * d2 / ((1.0 - np2) * (1.0 - nq2))
    return float(np.arccosh(max(arg, 1.0)))


def pairwise_hyperbolic_distance(points: np.ndarray) -> np.ndarray:
    """Distance matrix for an (N, 2) array of disk points."""
    nrm = 1.0 - (points**2).sum(axis=1)
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)
    arg = 1.0 + 2.0 * d2 / (nrm[:, None] * nrm[None, :])
    return np.arccosh(np.maximum(arg, 1.0))


@dataclass(frozen=True)
class CurveGeometry:
    """Sampled differential geometry of a radial-graph curve."""

    theta_samples: np.ndarray
    rho: np.ndarray
    rho_p: np.ndarray
    rho_pp: np.ndarray
    kappa: np.ndarray          # geodesic curvature w.r.t. the outward normal
    kappa_shift: np.ndarray    # kappa - 1, the horo-convexity variable
    support: np.ndarray        # <sinh(r) d_r, outward normal>
    cosh_r: np.ndarray
    speed: np.ndarray          # arc-length density sqrt(rho'^2 + sinh^2 rho)


def polar_graph_geometry(rho, rho_p, rho_pp):
    """Curvature, support function and arc density from rho and derivatives.

    For the metric dr^2 + sinh^2(r) dtheta^2 a radial graph r = rho(theta) has

        kappa = [sinh^2 cosh + 2 cosh rho'^2 - sinh rho''] / W^3,
        u     = sinh^2(rho) / W,       W = sqrt(rho'^2 + sinh^2 rho),

    which reduces to kappa = coth(R), u = sinh(R) on a centered circle.
    """
    sh = np.sinh(rho)
    ch = np.cosh(rho)
    sh2 = sh * sh
    w2 = rho_p * rho_p + sh2
    w = np.sqrt(w2)
    kappa = (sh2 * ch + 2.0 * ch * rho_p * rho_p - sh * rho_pp) / (w2 * w)
    support = sh2 / w
    return kappa, support, w


def curve_geometry(domain: StarDomain, n_samples: int = 512) -> CurveGeometry:
    """Evaluate boundary geometry on a uniform angular grid."""
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    rho = domain.rho(theta)
    if np.min(rho) <= 0.0:
        raise ValueError("boundary radius must be positive")
    rho_p = domain.rho_prime(theta)
    rho_pp = domain.rho_second(theta)
    kappa, support, speed = polar_graph_geometry(rho, rho_p, rho_pp)
    return CurveGeometry(
        theta_samples=theta,
        rho=rho,
        rho_p=rho_p,
        rho_pp=rho_pp,
        kappa=kappa,
        kappa_shift=kappa - 1.0,
        support=support,
        cosh_r=np.cosh(rho),
        speed=speed,
    )


def horo_convexity_margin(domain: StarDomain, n_samples: int = 1024) -> float:
    """min_theta kappa(theta) - 1; nonnegative iff the domain is horo-convex."""
    geom = curve_geometry(domain, n_samples)
    return float(np.min(geom.kappa) - 1.0)


def boundary_disk_points(domain: StarDomain, n_samples: int = 512) -> np.ndarray:
    """Boundary samples in disk coordinates, shape (n_samples, 2)."""
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    s = np.tanh(0.5 * domain.rho(theta))
    return np.stack([s * np.cos(theta), s * np.sin(theta)], axis=1)


def diameter(domain: StarDomain, n_samples: int = 512) -> float:
    """Max pairwise boundary distance (exact for convex domains as n grows)."""
    pts = boundary_disk_points(domain, n_samples)
    return float(pairwise_hyperbolic_distance(pts).max())
