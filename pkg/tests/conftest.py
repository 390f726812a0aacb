import pytest

from hyplab import eigen2d
from hyplab.domain import StarDomain


@pytest.fixture(scope="session")
def solve_cached():
    """Session-wide cache of eigen solves; several test modules and the
    acceptance suite share the same expensive grids."""
    cache = {}

    def solve(domain: StarDomain, h: float, k: int = 1) -> eigen2d.EigenSolution:
        key = (domain, h, k)
        if key not in cache:
            cache[key] = eigen2d.solve_domain(domain, h, k=k)
        return cache[key]

    return solve


@pytest.fixture(scope="session")
def standard_flow_run():
    """The reference flow experiment: rho = 1 + 0.05 cos(2 theta) to t = 5
    at 256 angular samples, with snapshots along the way.  Wall time of the
    march is recorded (the kernel is warmed first so compilation is not
    counted)."""
    import time
    from types import SimpleNamespace

    from hyplab import horoflow

    initial = StarDomain(1.0, cos_coeffs=(0.0, 0.05))
    horoflow.flow_run(initial, t_end=1e-4, n_theta=256)  # warm the kernel
    start = time.perf_counter()
    run = horoflow.flow_run(
        initial,
        t_end=5.0,
        snapshot_times=(0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0),
        n_theta=256,
    )
    elapsed = time.perf_counter() - start
    return SimpleNamespace(run=run, elapsed=elapsed)


@pytest.fixture(scope="session")
def flow_generated_domains():
    """Three strictly horo-convex domains of diameter <= 1, produced by
    flowing a perturbed small circle and exporting snapshots."""
    from hyplab import horoflow

    initial = StarDomain(0.45, cos_coeffs=(0.0, 0.015), sin_coeffs=(0.0, 0.0, 0.008))
    run = horoflow.flow_run(
        initial, t_end=0.8, snapshot_times=(0.1, 0.3, 0.8), n_theta=128
    )
    return [snap.domain for snap in run.snapshots]
