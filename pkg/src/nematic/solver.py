"""Energy-decreasing gradient-flow driver shared by the field solvers.

Each step solves the linearised backward-Euler system

    (M / dt + A) dx = -g

where ``M`` is the lumped mass, ``g`` the energy gradient and ``A`` is
empty (explicit flow), the elastic operator (semi-implicit, bulk lagged)
or the full Hessian (``"newton"``). A step is accepted only if the energy
does not increase; ``dt`` then grows, otherwise it shrinks and the step is
retried. With the full Hessian and growing ``dt`` the iteration becomes
Newton's method, which is what makes tight residuals reachable.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DivergenceError

log = logging.getLogger(__name__)

MODES = ("newton", "semi-implicit", "explicit")


@dataclass(frozen=True)
class StepSchedule:
    """Stopping rule and time-step control for a relaxation."""

    tol: float = 1e-8
    max_iters: int = 400
    mode: str = "newton"
    dt0: float | None = None
    dt_max: float = 1e14
    grow: float = 4.0
    shrink: float = 0.25
    max_rejections: int = 60

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown stepping mode {self.mode!r}; expected one of {MODES}")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


@dataclass
class SolveReport:
    iterations: int = 0
    final_energy: float = math.nan
    residual: float = math.nan
    sup_norm: float = math.nan
    wall_time: float = 0.0
    converged: bool = False
    energies: list = field(default_factory=list)
    message: str = ""

    def payload(self) -> dict:
        """Deterministic part of the report (no timings)."""
        return {
            "iterations": self.iterations,
            "final_energy": self.final_energy,
            "residual": self.residual,
            "sup_norm": self.sup_norm,
            "converged": self.converged,
            "energies": list(self.energies),
            "message": self.message,
        }


class Problem:
    """Interface of a discrete energy in its free unknowns ``x``."""

    mass: np.ndarray

    def energy(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def energy_change(self, x, x_new):  # pragma: no cover - interface
        raise NotImplementedError

    def gradient(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def operator(self, x, mode):  # pragma: no cover - interface
        raise NotImplementedError

    def residual(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def project(self, x):
        return x

    def check(self, x):
        """Raise :class:`DivergenceError` if ``x`` left the admissible region."""


def _default_dt(problem: Problem, x, mode: str) -> float:
    if mode == "explicit":
        A = problem.operator(x, "newton")
        row = np.asarray(abs(A).sum(axis=1)).ravel()
        return 0.9 / float(np.max(row / problem.mass))
    return 1e-2


def relax_problem(problem: Problem, x0: np.ndarray, schedule: StepSchedule):
    """Run the flow from ``x0``. Returns ``(x, report)``; never loosens ``tol``."""
    t0 = time.perf_counter()
    x = problem.project(np.array(x0, dtype=float))
    E = problem.energy(x)
    report = SolveReport(energies=[E])
    dt = schedule.dt0 if schedule.dt0 is not None else _default_dt(problem, x, schedule.mode)
    if schedule.mode == "explicit":
        dt_cap = 4.0 * dt
    else:
        dt_cap = schedule.dt_max
    res = problem.residual(x)
    it = 0
    while res > schedule.tol and it < schedule.max_iters:
        g = problem.gradient(x)
        A = problem.operator(x, schedule.mode)
        rejections = 0
        while True:
            lhs = sp.diags(problem.mass / dt) if A is None else A + sp.diags(problem.mass / dt)
            try:
                dx = -splu(sp.csc_matrix(lhs)).solve(g)
                ok = bool(np.all(np.isfinite(dx)))
            except RuntimeError:
                ok = False
            if ok:
                x_new = problem.project(x + dx)
                dE = problem.energy_change(x, x_new)
                if dE <= 0.0:
                    break
            rejections += 1
            dt *= schedule.shrink
            if rejections > schedule.max_rejections:
                report.message = f"line search failed at iteration {it} (dt={dt:.3g}, residual={res:.3g})"
                raise DivergenceError(report.message)
        x = x_new
        E = E + dE
        problem.check(x)
        it += 1
        report.energies.append(E)
        res = problem.residual(x)
        if rejections == 0:
            dt = min(dt * schedule.grow, dt_cap)
        log.debug("iter %d  E=%.16g  res=%.3e  dt=%.3e", it, E, res, dt)
    report.iterations = it
    # the history accumulates cancellation-free differences; the final value is recomputed
    report.final_energy = problem.energy(x)
    report.residual = res
    report.converged = res <= schedule.tol
    report.wall_time = time.perf_counter() - t0
    if not report.converged:
        report.message = f"not converged after {it} iterations (residual {res:.3e} > tol {schedule.tol:.1e})"
    else:
        report.message = "converged"
    return x, report
