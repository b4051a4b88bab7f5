import time

import numpy as np
import pytest

from csflab import flow, scenarios


class TimedRun:
    """Trajectory plus the wall-clock seconds spent producing it."""

    def __init__(self, traj, seconds):
        self.traj = traj
        self.seconds = seconds


def _timed_evolve(curve, **controls):
    t0 = time.monotonic()
    traj = flow.evolve(curve, **controls)
    return TimedRun(traj, time.monotonic() - t0)


@pytest.fixture(scope="session")
def circle_run():
    return _timed_evolve(scenarios.circle_curve(1.0, 256))


@pytest.fixture(scope="session")
def ellipse_run():
    return _timed_evolve(scenarios.ellipse_curve(2.0, 1.0, 256))


@pytest.fixture(scope="session")
def fig8_runs():
    runs = {}
    for eps in (0.25, 0.5, 1.0):
        runs[eps] = _timed_evolve(scenarios.figure_eight(eps, 512))
    return runs


@pytest.fixture(scope="session")
def wave_batch():
    rng = np.random.default_rng(20240817)
    runs = []
    t0 = time.monotonic()
    for _ in range(20):
        base = scenarios.random_fourier_curve(rng, n=192, degree=5, dim=3)
        curve = scenarios.wave_perturbation(base, 0.2)
        runs.append(flow.evolve(curve))
    return runs, time.monotonic() - t0
