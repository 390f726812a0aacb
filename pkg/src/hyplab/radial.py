"""Dirichlet eigenvalues and log-concavity margins of geodesic balls.

Separation of variables on the metric dr^2 + sinh^2(r) dz^2 reduces the
eigenvalue problem on a ball of radius r in n-dimensional hyperbolic space to
the radial ODE

    v'' + (n-1) coth(t) v' + (mu - l(l+n-2)/sinh^2 t) v = 0   on (0, r),

with v regular at 0 and v(r) = 0.  Eigenvalues are found by shooting: RK4
integration from a Taylor start at t0 = 1e-6 and bisection on mu.  The
log-derivative phi = (log v)' of the ground state satisfies the Riccati
equation

    phi' = -(n-1) coth(t) phi - mu1 - phi^2,    phi(0) = 0,

whose tangential margin sup (coth t - 1) phi and radial margin sup (phi'-phi)
decide whether the eigenfunction is super log-concave.  In three dimensions
the ground state is sin(pi t / r)/sinh(t) in closed form, which serves as the
exact oracle throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import BlowUp, BracketFailure, NoRealRoot, NoSignChange, StiffIntegration

T0 = 1e-6


@dataclass(frozen=True)
class RadialEigenResult:
    n: int
    r: float
    l: int
    k: int
    mu: float
    t_samples: np.ndarray
    v_samples: np.ndarray
    residual: float


@dataclass(frozen=True)
class PhiProfile:
    """Log-derivative of the ground state and its concavity margins."""

    n: int
    r: float
    mu1: float
    t_samples: np.ndarray
    phi: np.ndarray
    phi_p: np.ndarray
    margin_tangential: float   # sup (coth t) phi - phi
    margin_radial: float       # sup phi' - phi


@dataclass(frozen=True)
class BallConcavityReport:
    n: int
    r: float
    mu1: float
    margin_tangential: float
    margin_radial: float
    strictly_super_log_concave: bool


@dataclass(frozen=True)
class GapReport:
    mu1: float
    mu2: float
    gap: float
    diameter: float
    reference_scale: float  # pi^2 / diameter^2


# ---------------------------------------------------------------------------
# shooting integrator
# ---------------------------------------------------------------------------

@njit(cache=True)
def _rk4_linear(coeffs, mu, v, vp):
    """March the linear system; coeffs rows are (h, p1, q1, p2, q2, p3, q3).

    p = -(n-1) coth(t), q = l(l+n-2)/sinh^2(t); the eigenvalue enters as
    q - mu.  Returns (v_end, vp_end, max |v|, finite flag).
    """
    vmax = abs(v)
    for i in range(coeffs.shape[0]):
        h = coeffs[i, 0]
        p1 = coeffs[i, 1]
        q1 = coeffs[i, 2] - mu
        p2 = coeffs[i, 3]
        q2 = coeffs[i, 4] - mu
        p3 = coeffs[i, 5]
        q3 = coeffs[i, 6] - mu
        k1v = vp
        k1p = p1 * vp + q1 * v
        av = v + 0.5 * h * k1v
        ap = vp + 0.5 * h * k1p
        k2v = ap
        k2p = p2 * ap + q2 * av
        av = v + 0.5 * h * k2v
        ap = vp + 0.5 * h * k2p
        k3v = ap
        k3p = p2 * ap + q2 * av
        av = v + h * k3v
        ap = vp + h * k3p
        k4v = ap
        k4p = p3 * ap + q3 * av
        v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        vp = vp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        a = abs(v)
        if a > vmax:
            vmax = a
    ok = np.isfinite(v) and np.isfinite(vp)
    return v, vp, vmax, ok


@njit(cache=True)
def _rk4_linear_record(coeffs, mu, v, vp, out_v, out_vp):
    """Same march as _rk4_linear, recording the state after every step."""
    for i in range(coeffs.shape[0]):
        h = coeffs[i, 0]
        p1 = coeffs[i, 1]
        q1 = coeffs[i, 2] - mu
        p2 = coeffs[i, 3]
        q2 = coeffs[i, 4] - mu
        p3 = coeffs[i, 5]
        q3 = coeffs[i, 6] - mu
        k1v = vp
        k1p = p1 * vp + q1 * v
        av = v + 0.5 * h * k1v
        ap = vp + 0.5 * h * k1p
        k2v = ap
        k2p = p2 * ap + q2 * av
        av = v + 0.5 * h * k2v
        ap = vp + 0.5 * h * k2p
        k3v = ap
        k3p = p2 * ap + q2 * av
        av = v + h * k3v
        ap = vp + h * k3p
        k4v = ap
        k4p = p3 * ap + q3 * av
        v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        vp = vp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        out_v[i] = v
        out_vp[i] = vp


@lru_cache(maxsize=128)
def _coeff_table(n: int, l: int, r: float, n_steps: int):
    """Step table for the RK4 march: geometric ramp off the singular origin
    (relative step 0.1) followed by a uniform phase of n_steps steps to r."""
    c = float(l * (l + n - 2))
    nm1 = float(n - 1)

    def pq(t):
        sh = math.sinh(t)
        return -nm1 * math.cosh(t) / sh, c / (sh * sh)

    rows = []
    ts = [T0]
    t = T0
    t_reg = min(0.05, r / 8.0)
    while t < t_reg - 1e-15:
        h = min(0.1 * t, t_reg - t)
        p1, q1 = pq(t)
        p2, q2 = pq(t + 0.5 * h)
        p3, q3 = pq(t + h)
        rows.append((h, p1, q1, p2, q2, p3, q3))
        t += h
        ts.append(t)
    h = (r - t) / n_steps
    t_base = t
    for i in range(n_steps):
        ti = t_base + i * h
        p1, q1 = pq(ti)
        p2, q2 = pq(ti + 0.5 * h)
        p3, q3 = pq(min(ti + h, r))
        rows.append((h, p1, q1, p2, q2, p3, q3))
        ts.append(min(ti + h, r))
    return np.array(rows), np.array(ts)


def _taylor_start(n: int, l: int, mu: float):
    """Series launch at T0, scaled by T0^{-l} (the ODE is linear)."""
    b = -(mu + l * (2.0 * n + l - 3.0) / 3.0) / (2.0 * (n + 2 * l))
    if l == 0:
        return 1.0 + b * T0 * T0, 2.0 * b * T0
    return 1.0 + b * T0 * T0, (l + (l + 2) * b * T0 * T0) / T0


def _shoot(n: int, l: int, mu: float, r: float, n_steps: int) -> tuple[float, float]:
    """Value at r (scaled) and the solution's max amplitude."""
    coeffs, _ = _coeff_table(n, l, r, n_steps)
    v0, vp0 = _taylor_start(n, l, mu)
    v, vp, vmax, ok = _rk4_linear(coeffs, mu, v0, vp0)
    if not ok:
        raise StiffIntegration(f"non-finite shooting state at n={n} l={l} mu={mu}")
    return v, vmax

def _shoot_profile(n: int, l: int, mu: float, r: float, n_steps: int):
    coeffs, ts = _coeff_table(n, l, r, n_steps)
    v0, vp0 = _taylor_start(n, l, mu)
    out_v = np.empty(coeffs.shape[0])
    out_vp = np.empty(coeffs.shape[0])
    _rk4_linear_record(coeffs, mu, v0, vp0, out_v, out_vp)
    t = np.asarray(ts)
    v = np.concatenate(([v0], out_v))
    vp = np.concatenate(([vp0], out_vp))
    return t, v, vp


SWEEP_STEPS = 512


@lru_cache(maxsize=512)
def _mu_ball_cached(n: int, r: float, l: int, k: int, n_steps: int, mu_cap: float | None):
    step = max(1.0, math.pi**2 / r**2) / 8.0
    if mu_cap is None:
        mu_cap = 1e4 * max(1.0, 1.0 / r**2) * (k + l + 2) ** 2 * n

    f_lo, _ = _shoot(n, l, 0.0 if l == 0 else step * 1e-9, r, SWEEP_STEPS)
    crossings = 0
    bracket = None
    mu = 0.0
    while mu < mu_cap:
        mu += step
        f_hi, _ = _shoot(n, l, mu, r, SWEEP_STEPS)
        if f_lo * f_hi < 0.0:
            crossings += 1
            if crossings == k:
                bracket = (mu - step, mu, f_lo)
                break
        f_lo = f_hi
    if bracket is None:
        raise BracketFailure(
            f"no sign change for n={n} r={r} l={l} k={k} up to mu={mu_cap:.3g}"
        )

    lo, hi, f_lo = bracket
    residual = math.inf
    mid = 0.5 * (lo + hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f_mid, vmax = _shoot(n, l, mid, r, n_steps)
        residual = abs(f_mid) / vmax
        if residual <= 1e-12:
            break
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo = mid
            f_lo = f_mid
        if hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, mid):
            break

    t, v, vp = _shoot_profile(n, l, mid, r, n_steps)
    f_end, vmax = v[-1], np.max(np.abs(v))
    residual = abs(f_end) / vmax
    if l == 0:
        v = v / v[0]  # v(0+) scale is 1 by the Taylor launch
    else:
        v = v / vmax
    t.flags.writeable = False  # results are cached and shared
    v.flags.writeable = False
    return RadialEigenResult(
        n=n, r=r, l=l, k=k, mu=mid, t_samples=t, v_samples=v, residual=residual
    )


def mu_ball(
    n: int,
    r: float,
    l: int = 0,
    k: int = 1,
    n_steps: int = 2048,
    mu_cap: float | None = None,
) -> RadialEigenResult:
    """k-th Dirichlet eigenvalue of the ball of radius r at angular index l."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if r <= 0:
        raise ValueError("radius must be positive")
    if l < 0 or k < 1:
        raise ValueError("need l >= 0 and k >= 1")
    return _mu_ball_cached(int(n), float(r), int(l), int(k), int(n_steps), mu_cap)


# ---------------------------------------------------------------------------
# closed forms in three dimensions
# ---------------------------------------------------------------------------

def mu1_h3_closed_form(r: float) -> float:
    """Ground-state eigenvalue 1 + pi^2/r^2 of the ball in three dimensions."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return 1.0 + math.pi**2 / r**2


def v_h3(r: float, t) -> np.ndarray | float:
    """Closed-form ground state sin(pi t / r) / sinh(t) on (0, r)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(t_arr >= r):
        raise ValueError("need 0 < t < r")
    out = np.sin(np.pi * t_arr / r) / np.sinh(t_arr)
    return float(out) if np.isscalar(t) else out


def _csch2_excess(t):
    """1/sinh^2(t) - 1/t^2, stable near 0."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.05
    ts = np.where(small, t, 1.0)
    series = -1.0 / 3.0 + ts**2 / 15.0 - 2.0 * ts**4 / 189.0
    tb = np.where(small, 1.0, t)
    direct = 1.0 / np.sinh(tb) ** 2 - 1.0 / tb**2
    return np.where(small, series, direct)


def _inv_sin2_excess(x):
    """1/sin^2(x) - 1/x^2, stable near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.05
    xs = np.where(small, x, 1.0)
    series = 1.0 / 3.0 + xs**2 / 15.0 + 2.0 * xs**4 / 189.0
    xb = np.where(small, 1.0, x)
    direct = 1.0 / np.sin(xb) ** 2 - 1.0 / xb**2
    return np.where(small, series, direct)


def _coth_excess(t):
    """coth(t) - 1/t, stable near 0."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.05
    ts = np.where(small, t, 1.0)
    series = ts / 3.0 - ts**3 / 45.0 + 2.0 * ts**5 / 945.0
    tb = np.where(small, 1.0, t)
    direct = np.cosh(tb) / np.sinh(tb) - 1.0 / tb
    return np.where(small, series, direct)


def _cot_excess(x):
    """cot(x) - 1/x, stable near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.05
    xs = np.where(small, x, 1.0)
    series = -xs / 3.0 - xs**3 / 45.0 - 2.0 * xs**5 / 945.0
    xb = np.where(small, 1.0, x)
    direct = np.cos(xb) / np.sin(xb) - 1.0 / xb
    return np.where(small, series, direct)


def h3_radial_margin_curve(r: float, t) -> np.ndarray:
    """phi'(t) - phi(t) for the closed-form profile, phi = (log v)'.

    The 1/t^2 poles of the two second-derivative pieces cancel; each piece is
    evaluated with its pole subtracted so the curve is stable down to t ~ 0,
    where it tends to -mu1/3.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    q = math.pi / r
    x = q * t
    second = _csch2_excess(t) - q**2 * _inv_sin2_excess(x)
    first = _coth_excess(t) - q * _cot_excess(x)
    return second + first


def h3_radial_margin(r: float, n_grid: int = 8192) -> float:
    """sup of the closed-form radial margin curve over (0, r)."""
    t = np.linspace(T0, r * (1.0 - 1e-9), n_grid)
    return float(np.max(h3_radial_margin_curve(r, t)))


# ---------------------------------------------------------------------------
# log-derivative profile and concavity margins
# ---------------------------------------------------------------------------

@njit(cache=True)
def _riccati_march(tgrid, n, mu, r):
    """Integrate phi' = -(n-1) coth(t) phi - mu - phi^2 along tgrid.

    Sub-steps adapt to the local stiffness scale (the 1/t coefficient near the
    origin, the phi^2 term near the zero of v).  Returns (phi values, status,
    index) with status 1 when phi dives below the pole asymptote -1/(r - t)
    by a factor 50 before reaching the end (an eigenvalue mismatch).
    """
    out = np.empty_like(tgrid)
    nm1 = n - 1.0
    t = tgrid[0]
    phi = -mu * t / n
    out[0] = phi
    sqmu = math.sqrt(mu) if mu > 0.0 else 0.0
    for j in range(1, tgrid.shape[0]):
        target = tgrid[j]
        while t < target - 1e-15:
            coth = math.cosh(t) / math.sinh(t)
            scale = nm1 * coth + 2.0 * abs(phi) + sqmu + 1.0
            h = 0.2 / scale
            if t + h > target:
                h = target - t
            k1 = -nm1 * coth * phi - mu - phi * phi
            tm = t + 0.5 * h
            cm = math.cosh(tm) / math.sinh(tm)
            a = phi + 0.5 * h * k1
            k2 = -nm1 * cm * a - mu - a * a
            a = phi + 0.5 * h * k2
            k3 = -nm1 * cm * a - mu - a * a
            te = t + h
            ce = math.cosh(te) / math.sinh(te)
            a = phi + h * k3
            k4 = -nm1 * ce * a - mu - a * a
            phi = phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = te
            if not np.isfinite(phi) or phi * (r - t) < -50.0:
                return out, 1, j
        out[j] = phi
    return out, 0, tgrid.shape[0]


def phi_profile(n: int, r: float, n_grid: int = 4096, mu1: float | None = None) -> PhiProfile:
    """Ground-state log-derivative on a uniform grid over [T0, r - T0].

    ``mu1`` overrides the shooting eigenvalue (diagnostic use only); a wrong
    value makes phi blow up before r, which is reported as an error.
    """
    if n_grid < 4096:
        raise ValueError("need at least 4096 grid points")
    if mu1 is None:
        mu1 = mu_ball(n, r).mu
    tgrid = np.linspace(T0, r - T0, n_grid)
    phi, status, idx = _riccati_march(tgrid, float(n), float(mu1), float(r))
    if status != 0:
        raise BlowUp(
            f"phi escaped before t=r at grid index {idx} (n={n}, r={r}, mu1={mu1})"
        )
    coth = np.cosh(tgrid) / np.sinh(tgrid)
    phi_p = -(n - 1.0) * coth * phi - mu1 - phi * phi
    margin_tangential = float(np.max((coth - 1.0) * phi))
    margin_radial = float(np.max(phi_p - phi))
    return PhiProfile(
        n=n,
        r=r,
        mu1=float(mu1),
        t_samples=tgrid,
        phi=phi,
        phi_p=phi_p,
        margin_tangential=margin_tangential,
        margin_radial=margin_radial,
    )


def ball_concavity(n: int, r: float) -> BallConcavityReport:
    """Concavity margins of the ground state; strict when both are negative."""
    prof = phi_profile(n, r)
    return BallConcavityReport(
        n=n,
        r=r,
        mu1=prof.mu1,
        margin_tangential=prof.margin_tangential,
        margin_radial=prof.margin_radial,
        strictly_super_log_concave=bool(
            prof.margin_tangential < 0.0 and prof.margin_radial < 0.0
        ),
    )


# ---------------------------------------------------------------------------
# critical radii
# ---------------------------------------------------------------------------

def critical_radius_h3(tol: float = 1e-4) -> float:
    """Radius where the three-dimensional ball stops being super log-concave.

    Bisection on the sign of the closed-form radial margin; the threshold is
    expected inside (2, 3) and a bracket failure there is surfaced loudly.
    """
    lo, hi = 2.0, 3.0
    m_lo = h3_radial_margin(lo)
    m_hi = h3_radial_margin(hi)
    if not (m_lo < 0.0 < m_hi):
        raise NoSignChange(
            f"radial margin does not change sign on (2,3): m(2)={m_lo:.3g}, m(3)={m_hi:.3g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h3_radial_margin(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_radius(n: int, r_max: float = 6.0, tol: float = 5e-5) -> float:
    """Largest radius (up to r_max) with a strictly super log-concave ground
    state, via shooting; returns r_max when no transition is found."""
    if not (0.0 < r_max <= 10.0):
        raise ValueError("r_max must lie in (0, 10]")
    scan = np.arange(0.25, r_max + 1e-9, 0.25)
    prev_r = None
    bracket = None
    for rr in scan:
        m = phi_profile(n, float(rr)).margin_radial
        if m > 0.0:
            if prev_r is None:
                # transition below the first scan point
                bracket = (0.05, float(rr))
            else:
                bracket = (prev_r, float(rr))
            break
        prev_r = float(rr)
    if bracket is None:
        return float(r_max)
    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi_profile(n, mid).margin_radial < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# crossing margin and spectral gap
# ---------------------------------------------------------------------------

def first_crossing_margin(n: int, mu1: float, t1: float) -> float:
    """Margin ruling out a first interior crossing of the radial condition.

    With A = 1 + (n-1) coth(t1) and B = (n-1) / (2 sinh^2 t1), a positive
    value of 2/(A + sqrt(A^2 - 4 mu1)) - 1/(B + sqrt(B^2 + mu1)) certifies
    that the crossing configuration at (t1, mu1) is contradictory.
    """
    if t1 <= 0.0 or mu1 <= 0.0:
        raise ValueError("need t1 > 0 and mu1 > 0")
    A = 1.0 + (n - 1.0) / math.tanh(t1)
    B = (n - 1.0) / (2.0 * math.sinh(t1) ** 2)
    disc = A * A - 4.0 * mu1
    if disc < 0.0:
        raise NoRealRoot(f"A^2 < 4 mu1 at t1={t1}, mu1={mu1}")
    return 2.0 / (A + math.sqrt(disc)) - 1.0 / (B + math.sqrt(B * B + mu1))


def gap_ball(n: int, r: float) -> GapReport:
    """Fundamental gap of the ball: mu2 is the smaller of the second radial
    mode and the first l=1 mode (higher l interlace above by Sturm theory)."""
    mu1 = mu_ball(n, r, l=0, k=1).mu
    mu2 = min(mu_ball(n, r, l=0, k=2).mu, mu_ball(n, r, l=1, k=1).mu)
    d = 2.0 * r
    return GapReport(
        mu1=mu1,
        mu2=mu2,
        gap=mu2 - mu1,
        diameter=d,
        reference_scale=math.pi**2 / d**2,
    )
