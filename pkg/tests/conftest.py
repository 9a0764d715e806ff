"""Shared fixtures: the expensive solves run once per session."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nematic.fields import ExteriorGrid
from nematic.qtensor import MaterialParams

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")

# declared constants for every numerical experiment (illustrative, not measured)
A, B, C = 1.0, 1.0, 1.0
SWEEP_LS = (25.0, 100.0, 400.0)
SWEEP_W = 5.0

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def material():
    return MaterialParams(A, B, C, L=100.0, W=math.inf)


@pytest.fixture(scope="session")
def study_grid():
    return ExteriorGrid(20.0, 128, 96, "asymptotic")


@pytest.fixture(scope="session")
def ldg_sweep(study_grid):
    """Small-particle convergence study at ``w = 5`` over the three L values."""
    from nematic.analysis import convergence_study

    return convergence_study(SWEEP_LS, SWEEP_W, MaterialParams(A, B, C), study_grid, threads=1)


@pytest.fixture(scope="session")
def harmonic_grid():
    return ExteriorGrid(20.0, 256, 192)


@pytest.fixture(scope="session")
def harmonic_multistart(harmonic_grid):
    from nematic.harmonic import solve_multistart

    return solve_multistart(harmonic_grid)


@pytest.fixture(scope="session")
def harmonic_mirror(harmonic_grid, harmonic_multistart):
    """Relaxation of the z-reflected start of the winning branch, far field pi."""
    from nematic.harmonic import initial_psi, psi_relax

    kind = harmonic_multistart.best.init
    return psi_relax(initial_psi(harmonic_grid, kind, math.pi), harmonic_grid, far_field=math.pi)
