"""Shifted-curvature flow of radial-graph curves in the hyperbolic plane.

Curves evolve with outward normal speed

    F = (cosh rho - u) / kappa_shift - u,

where u is the support function and kappa_shift = kappa - 1; geodesic
circles are stationary and strictly horo-convex initial curves stay inside
their initial radial bounds while flowing toward a circle.  Written on the
radial graph the evolution is

    rho_t = F * sqrt(rho'^2 + sinh^2 rho) / sinh(rho),

integrated by RK4 in time with spectral angular derivatives.  The long
march runs in a compiled kernel; the per-step time bound

    dt = min(0.1 dtheta^2, 0.5 dtheta^2 (min kappa_shift)^2 / max cosh rho)

is recomputed from the current state at every step.  Hitting the
kappa_shift floor stops the flow: strict horo-convexity is expected to
persist, so a floor hit indicates a discretization failure, not physics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .domain import MAX_MODES, StarDomain
from .errors import HoroConvexityLost, ProjectionLoss, UnstableStep
from .hypgeom import horo_convexity_margin, polar_graph_geometry

KAPPA_SHIFT_FLOOR = 1e-6


@dataclass(frozen=True)
class FlowState:
    """Curve snapshot: radial samples on a uniform angular grid plus the
    monitors used by the step-size control and the invariant checks."""

    t: float
    rho: np.ndarray
    min_rho: float
    max_rho: float
    min_kappa_shift: float
    support_min: float
    support_max: float
    oscillation: float        # max rho - min rho
    circle_distance: float    # max |rho - mean rho|
    max_diffusivity: float    # max (cosh rho - u) / (kappa_shift^2 W^2)

    @property
    def n_theta(self) -> int:
        return len(self.rho)


@dataclass(frozen=True)
class FlowSnapshot:
    t: float
    state: FlowState
    domain: StarDomain


@dataclass(frozen=True)
class FlowRun:
    initial: StarDomain
    snapshots: tuple
    monitor_t: np.ndarray
    monitor_min_rho: np.ndarray
    monitor_max_rho: np.ndarray
    monitor_min_kappa_shift: np.ndarray
    monitor_oscillation: np.ndarray
    fitted_rate: float
    min_rho_seen: float         # over every accepted step, not just snapshots
    max_rho_seen: float
    min_kappa_shift_seen: float
    final_state: FlowState
    final_domain: StarDomain

    @property
    def radius_bounds_ok(self) -> bool:
        lo = self.monitor_min_rho[0]
        hi = self.monitor_max_rho[0]
        return bool(self.min_rho_seen >= lo - 1e-8 and self.max_rho_seen <= hi + 1e-8)


# ---------------------------------------------------------------------------
# spectral derivatives
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _diff_matrices(n: int) -> np.ndarray:
    """Stacked first/second spectral differentiation matrices (2n, n)."""
    k = np.fft.rfftfreq(n, d=1.0 / n)
    eye = np.eye(n)
    f = np.fft.rfft(eye, axis=0)
    d1 = np.fft.irfft(f * (1j * k)[:, None], n, axis=0)
    d2 = np.fft.irfft(f * (-(k * k))[:, None], n, axis=0)
    return np.ascontiguousarray(np.vstack([d1, d2]))


def spectral_derivatives(rho: np.ndarray):
    """First and second periodic derivatives of uniformly sampled rho."""
    n = len(rho)
    k = np.fft.rfftfreq(n, d=1.0 / n)
    f = np.fft.rfft(rho)
    return np.fft.irfft(f * 1j * k, n), np.fft.irfft(f * -(k * k), n)


# ---------------------------------------------------------------------------
# state construction and single-step API
# ---------------------------------------------------------------------------

def make_state(t: float, rho: np.ndarray) -> FlowState:
    rho = np.asarray(rho, dtype=float)
    if np.min(rho) <= 0.0:
        raise ValueError("rho must be positive")
    rho_p, rho_pp = spectral_derivatives(rho)
    kappa, support, speed = polar_graph_geometry(rho, rho_p, rho_pp)
    mean = float(rho.mean())
    kt = kappa - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        diffusivity = (np.cosh(rho) - support) / (kt * kt * speed * speed)
    max_diff = float(np.max(diffusivity)) if np.all(np.isfinite(diffusivity)) else np.inf
    return FlowState(
        t=float(t),
        rho=rho,
        min_rho=float(rho.min()),
        max_rho=float(rho.max()),
        min_kappa_shift=float(kt.min()),
        support_min=float(support.min()),
        support_max=float(support.max()),
        oscillation=float(rho.max() - rho.min()),
        circle_distance=float(np.abs(rho - mean).max()),
        max_diffusivity=max_diff,
    )


def state_from_domain(domain: StarDomain, n_theta: int = 256, t: float = 0.0) -> FlowState:
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    return make_state(t, domain.rho(theta))


def flow_speed(state: FlowState, kt_floor: float = KAPPA_SHIFT_FLOOR) -> np.ndarray:
    """Normal speed per sample; zero identically on geodesic circles."""
    rho = state.rho
    rho_p, rho_pp = spectral_derivatives(rho)
    kappa, support, _ = polar_graph_geometry(rho, rho_p, rho_pp)
    kt = kappa - 1.0
    if kt.min() <= kt_floor:
        raise HoroConvexityLost(
            f"kappa_shift reached {kt.min():.3e} at t={state.t:.6f}"
        )
    return (np.cosh(rho) - support) / kt - support


def _rho_velocity(rho: np.ndarray, kt_floor: float) -> np.ndarray:
    rho_p, rho_pp = spectral_derivatives(rho)
    kappa, support, speed = polar_graph_geometry(rho, rho_p, rho_pp)
    kt = kappa - 1.0
    if kt.min() <= kt_floor:
        raise HoroConvexityLost(f"kappa_shift reached {kt.min():.3e}")
    f = (np.cosh(rho) - support) / kt - support
    return f * speed / np.sinh(rho)


# RK4 on the spectrally discretized heat operator is stable for
# dt * D * (pi/dtheta)^2 <= 2.79; with a 0.7 safety factor this is
# dt <= 0.19 dtheta^2 / D.
STABILITY_COEFF = 0.19


def dt_max(state: FlowState) -> float:
    """Parabolic step bound recomputed from the current monitors.

    The two heuristic terms are capped by the von Neumann limit for the
    state's largest effective diffusivity (cosh rho - u)/(kappa_shift W)^2;
    for strongly horo-convex curves of small radius the heuristic terms alone
    admit unstable steps.
    """
    dtheta = 2.0 * np.pi / state.n_theta
    cap = 0.1 * dtheta**2
    curv = 0.5 * dtheta**2 * state.min_kappa_shift**2 / np.cosh(state.max_rho)
    neumann = STABILITY_COEFF * dtheta**2 / max(state.max_diffusivity, 1e-300)
    return float(min(cap, curv, neumann))


def flow_step(state: FlowState, dt: float, kt_floor: float = KAPPA_SHIFT_FLOOR) -> FlowState:
    """One explicit RK4 step of the radial-graph evolution."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > dt_max(state) * (1.0 + 1e-12):
        raise UnstableStep(f"dt={dt:.3e} exceeds stability bound {dt_max(state):.3e}")
    rho = state.rho
    k1 = _rho_velocity(rho, kt_floor)
    k2 = _rho_velocity(rho + 0.5 * dt * k1, kt_floor)
    k3 = _rho_velocity(rho + 0.5 * dt * k2, kt_floor)
    k4 = _rho_velocity(rho + dt * k3, kt_floor)
    new_rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new_rho)):
        raise UnstableStep(f"non-finite state after step at t={state.t:.6f}")
    new_state = make_state(state.t + dt, new_rho)
    if new_state.oscillation > 10.0 * state.oscillation + 1e-12:
        raise UnstableStep(
            f"oscillation grew from {state.oscillation:.3e} to {new_state.oscillation:.3e}"
        )
    return new_state


# ---------------------------------------------------------------------------
# compiled march
# ---------------------------------------------------------------------------

@njit(cache=True)
def _speed_kernel(rho, D, out, n, kt_floor):
    """rho_t into out; returns (min kappa_shift, max effective diffusivity)."""
    d = np.dot(D, rho)
    min_kt = 1e300
    max_diff = 0.0
    for i in range(n):
        e = np.exp(rho[i])
        ei = 1.0 / e
        sh = 0.5 * (e - ei)
        ch = 0.5 * (e + ei)
        rp = d[i]
        rpp = d[n + i]
        sh2 = sh * sh
        rp2 = rp * rp
        w2 = rp2 + sh2
        w = np.sqrt(w2)
        kappa = (ch * (sh2 + 2.0 * rp2) - sh * rpp) / (w2 * w)
        kt = kappa - 1.0
        if kt < min_kt:
            min_kt = kt
        if kt <= kt_floor:
            return min_kt, max_diff
        num = w * ch - sh2
        diff = num / (kt * kt * w2 * w)
        if diff > max_diff:
            max_diff = diff
        out[i] = num / (kt * sh) - sh
    return min_kt, max_diff


@njit(cache=True)
def _advance_kernel(rho, D, t, t_target, dtheta, kt_floor):
    """March rho in place to t_target.

    Returns (t, steps, min_rho_seen, max_rho_seen, min_kt_seen, status) with
    status 0 = reached target, 1 = kappa_shift floor, 2 = non-finite state.
    """
    n = rho.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    min_rho_seen = 1e300
    max_rho_seen = -1e300
    min_kt_seen = 1e300
    steps = 0
    while t < t_target - 1e-15:
        kt1, diff1 = _speed_kernel(rho, D, k1, n, kt_floor)
        if kt1 <= kt_floor:
            return t, steps, min_rho_seen, max_rho_seen, min_kt_seen, 1
        if kt1 < min_kt_seen:
            min_kt_seen = kt1
        rmin = 1e300
        rmax = -1e300
        for i in range(n):
            if rho[i] < rmin:
                rmin = rho[i]
            if rho[i] > rmax:
                rmax = rho[i]
        if rmin < min_rho_seen:
            min_rho_seen = rmin
        if rmax > max_rho_seen:
            max_rho_seen = rmax
        if not np.isfinite(rmin + rmax):
            return t, steps, min_rho_seen, max_rho_seen, min_kt_seen, 2
        dt = 0.1 * dtheta * dtheta
        dt2 = 0.5 * dtheta * dtheta * kt1 * kt1 / np.cosh(rmax)
        if dt2 < dt:
            dt = dt2
        dt3 = STABILITY_COEFF * dtheta * dtheta / diff1
        if dt3 < dt:
            dt = dt3
        if t + dt > t_target:
            dt = t_target - t
        for i in range(n):
            tmp[i] = rho[i] + 0.5 * dt * k1[i]
        kt, _df = _speed_kernel(tmp, D, k2, n, kt_floor)
        if kt <= kt_floor:
            return t, steps, min_rho_seen, max_rho_seen, min_kt_seen, 1
        for i in range(n):
            tmp[i] = rho[i] + 0.5 * dt * k2[i]
        kt, _df = _speed_kernel(tmp, D, k3, n, kt_floor)
        if kt <= kt_floor:
            return t, steps, min_rho_seen, max_rho_seen, min_kt_seen, 1
        for i in range(n):
            tmp[i] = rho[i] + dt * k3[i]
        kt, _df = _speed_kernel(tmp, D, k4, n, kt_floor)
        if kt <= kt_floor:
            return t, steps, min_rho_seen, max_rho_seen, min_kt_seen, 1
        for i in range(n):
            rho[i] = rho[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        t = t + dt
        steps += 1
    return t_target, steps, min_rho_seen, max_rho_seen, min_kt_seen, 0


# ---------------------------------------------------------------------------
# full run
# ---------------------------------------------------------------------------

def project_to_domain(rho: np.ndarray, label: str | None = None) -> StarDomain:
    """Fourier re-projection of radial samples onto the domain format."""
    n = len(rho)
    f = np.fft.rfft(rho)
    n_keep = min(MAX_MODES, n // 2 - 1)
    a0 = float(f[0].real) / n
    cos_c = 2.0 * f[1 : n_keep + 1].real / n
    sin_c = -2.0 * f[1 : n_keep + 1].imag / n
    domain = StarDomain(a0, tuple(cos_c), tuple(sin_c), label=label)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    err = float(np.abs(domain.rho(theta) - rho).max())
    if err > 1e-8:
        raise ProjectionLoss(f"Fourier re-projection error {err:.3e} exceeds 1e-8")
    return domain


def flow_run(
    initial: StarDomain,
    t_end: float,
    snapshot_times=(),
    n_theta: int = 256,
    kt_floor: float = KAPPA_SHIFT_FLOOR,
    n_monitor: int = 200,
) -> FlowRun:
    """Flow a strictly horo-convex domain to t_end, recording snapshots."""
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    margin = horo_convexity_margin(initial)
    if margin <= 0.0:
        raise HoroConvexityLost(
            f"initial data is not strictly horo-convex (margin {margin:.3e})"
        )
    snapshot_times = sorted(set(float(s) for s in snapshot_times))
    if any(s < 0.0 or s > t_end for s in snapshot_times):
        raise ValueError("snapshot times must lie in [0, t_end]")

    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    rho = np.ascontiguousarray(initial.rho(theta))
    D = _diff_matrices(n_theta)
    dtheta = 2.0 * np.pi / n_theta

    monitor_grid = np.linspace(0.0, t_end, n_monitor + 1)
    events = sorted(set(snapshot_times) | set(monitor_grid.tolist()) | {t_end})

    snapshots = []
    mon_t, mon_min, mon_max, mon_kt, mon_osc = [], [], [], [], []
    min_rho_seen = float(rho.min())
    max_rho_seen = float(rho.max())
    min_kt_seen = np.inf
    t = 0.0

    def record(tt, state):
        mon_t.append(tt)
        mon_min.append(state.min_rho)
        mon_max.append(state.max_rho)
        mon_kt.append(state.min_kappa_shift)
        mon_osc.append(state.oscillation)

    state = make_state(0.0, rho.copy())
    if state.min_kappa_shift <= kt_floor:
        raise HoroConvexityLost(
            f"initial sampled curve has kappa_shift {state.min_kappa_shift:.3e}"
        )
    min_kt_seen = state.min_kappa_shift
    record(0.0, state)
    if snapshot_times and snapshot_times[0] == 0.0:
        snapshots.append(FlowSnapshot(0.0, state, project_to_domain(rho, initial.label)))

    def _partial_run(failure_time):
        return FlowRun(
            initial=initial,
            snapshots=tuple(snapshots),
            monitor_t=np.array(mon_t),
            monitor_min_rho=np.array(mon_min),
            monitor_max_rho=np.array(mon_max),
            monitor_min_kappa_shift=np.array(mon_kt),
            monitor_oscillation=np.array(mon_osc),
            fitted_rate=0.0,
            min_rho_seen=float(min_rho_seen),
            max_rho_seen=float(max_rho_seen),
            min_kappa_shift_seen=float(min_kt_seen),
            final_state=state,
            final_domain=project_to_domain(state.rho, initial.label),
        )

    for target in events:
        if target <= 0.0:
            continue
        t, _steps, seg_min, seg_max, seg_kt, status = _advance_kernel(
            rho, D, t, target, dtheta, kt_floor
        )
        if _steps > 0:
            min_rho_seen = min(min_rho_seen, seg_min)
            max_rho_seen = max(max_rho_seen, seg_max)
            min_kt_seen = min(min_kt_seen, seg_kt)
        if status != 0:
            exc_type = HoroConvexityLost if status == 1 else UnstableStep
            reason = "kappa_shift floor reached" if status == 1 else "non-finite state"
            exc = exc_type(f"{reason} at t={t:.6f}")
            exc.failure_time = t
            exc.partial_run = _partial_run(t)
            raise exc
        state = make_state(t, rho.copy())
        record(t, state)
        if any(abs(t - s) < 1e-12 for s in snapshot_times):
            snapshots.append(FlowSnapshot(t, state, project_to_domain(rho, initial.label)))
    min_rho_seen = min(min_rho_seen, state.min_rho)
    max_rho_seen = max(max_rho_seen, state.max_rho)
    min_kt_seen = min(min_kt_seen, state.min_kappa_shift)

    mon_t = np.array(mon_t)
    mon_osc = np.array(mon_osc)
    # exponential decay rate of the oscillation, fitted above the noise floor
    usable = mon_osc > max(1e-12, 1e-9 * mon_osc[0])
    if usable.sum() >= 3 and mon_osc[0] > 0.0:
        coeffs = np.polyfit(mon_t[usable], np.log(mon_osc[usable]), 1)
        rate = float(coeffs[0])
    else:
        rate = 0.0

    return FlowRun(
        initial=initial,
        snapshots=tuple(snapshots),
        monitor_t=mon_t,
        monitor_min_rho=np.array(mon_min),
        monitor_max_rho=np.array(mon_max),
        monitor_min_kappa_shift=np.array(mon_kt),
        monitor_oscillation=mon_osc,
        fitted_rate=rate,
        min_rho_seen=float(min_rho_seen),
        max_rho_seen=float(max_rho_seen),
        min_kappa_shift_seen=float(min_kt_seen),
        final_state=state,
        final_domain=project_to_domain(rho, initial.label),
    )
