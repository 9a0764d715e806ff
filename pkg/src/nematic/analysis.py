"""Studies built on the solvers: far-field decay, small-particle convergence, eigenvalue exchange."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DivergenceError, DomainError
from .fields import AxiQField, ExteriorGrid, cylindrical_matrix
from .ldg_relax import initial_field, relax
from .qtensor import MaterialParams, biaxiality_array, dist_to_ustar_array, eigenvalues_sorted
from .quadrupole import QuadrupolarConfig, q0_components, q0_eigenvalues
from .solver import SolveReport, StepSchedule


def worker_count(default: int = 1) -> int:
    """Thread cap from ``NEMATIC_THREADS`` (at least 1)."""
    raw = os.environ.get("NEMATIC_THREADS", "")
    try:
        n = int(raw) if raw.strip() else default
    except ValueError:
        n = default
    return max(1, n)


# ---------------------------------------------------------------------------
# decay


@dataclass(frozen=True)
class DecayProfile:
    """Per-radius maxima of ``dist(Q, U*) r / sqrt(L)`` and ``|Q - Q_inf| r``."""

    radii: np.ndarray
    dist_scaled: np.ndarray
    tail_scaled: np.ndarray

    def growth_ratio(self) -> float:
        """Max of ``dist_scaled`` over the outer half of the window divided by the inner-half max."""
        h = len(self.radii) // 2
        inner = float(np.max(self.dist_scaled[:h]))
        outer = float(np.max(self.dist_scaled[h:]))
        if inner == 0.0:
            return 0.0 if outer == 0.0 else math.inf
        return outer / inner

    def to_records(self) -> list:
        return [
            {"r": float(r), "dist_scaled": float(d), "tail_scaled": float(t)}
            for r, d, t in zip(self.radii, self.dist_scaled, self.tail_scaled)
        ]


def decay_profile(
    F: AxiQField,
    p: MaterialParams,
    g: ExteriorGrid,
    n: int = 20,
    r_min: float = 2.0,
    r_max: float | None = None,
) -> DecayProfile:
    """Decay diagnostics on ``n`` log-spaced radii in ``[r_min, r_max]`` (default ``R_out / 2``).

    Rows are interpolated linearly in ``s = 1/r``; each value is the max
    over the polar angle.
    """
    F.check_shape(g)
    r_max = 0.5 * g.r_out if r_max is None else r_max
    if not 1.0 <= r_min < r_max <= g.r_out:
        raise DomainError(f"invalid radius window [{r_min}, {r_max}] for R_out = {g.r_out}")
    radii = np.geomspace(r_min, r_max, n)
    q_inf = np.array([-p.s_star / 3.0, -p.s_star / 3.0, 0.0])
    dist, tail = np.empty(n), np.empty(n)
    for k, r in enumerate(radii):
        m = g.interpolate_rows(F.m, float(r))
        M = cylindrical_matrix(m)
        dist[k] = float(np.max(dist_to_ustar_array(M, p.s_star))) * r / math.sqrt(p.L)
        tail[k] = float(np.max(np.linalg.norm(cylindrical_matrix(m - q_inf), axis=(-2, -1)))) * r
    return DecayProfile(radii, dist, tail)


# ---------------------------------------------------------------------------
# convergence to the small-particle limit


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``log err = intercept - slope log x``."""

    params: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    residual: float

    def to_record(self) -> dict:
        return {
            "params": [float(x) for x in self.params],
            "errors": [float(e) for e in self.errors],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def fit_rate(params, errors) -> RateFit:
    x = np.asarray(params, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.size < 3 or x.size != e.size:
        raise DomainError("a rate fit needs at least 3 (parameter, error) pairs")
    if np.any(x <= 0.0) or np.any(e <= 0.0):
        raise DomainError("rate fit requires positive parameters and errors")
    A = np.stack([np.ones_like(x), -np.log(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(e), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(e)) ** 2)))
    return RateFit(x, e, float(coef[1]), float(coef[0]), resid)


@dataclass
class StudyRun:
    L: float
    error: float
    field: AxiQField
    report: SolveReport


@dataclass
class ConvergenceStudy:
    fit: RateFit
    runs: list = field(default_factory=list)

    @property
    def sup_norms(self) -> list:
        return [r.report.sup_norm for r in self.runs]


def q0_field(g: ExteriorGrid, cfg: QuadrupolarConfig) -> AxiQField:
    return AxiQField(np.stack(q0_components(g.r[:, None], g.phi[None, :], cfg), axis=-1))


def sup_error(F: AxiQField, G: AxiQField, g: ExteriorGrid, r_max: float = 3.0) -> float:
    """``max |F - G|`` (Frobenius) over nodes with ``r <= r_max``."""
    rows = g.r <= r_max * (1.0 + 1e-12)
    d = np.linalg.norm(F.orthonormal()[rows] - G.orthonormal()[rows], axis=-1)
    return float(np.max(d))


def convergence_study(
    Ls,
    w: float,
    material: MaterialParams,
    g: ExteriorGrid,
    schedule: StepSchedule | None = None,
    r_max: float = 3.0,
    threads: int | None = None,
) -> ConvergenceStudy:
    """Solve at every ``L`` with ``W = w L`` and fit the error against the limit ``Q0(w)``.

    ``material`` supplies ``a, b, c``; its ``L`` and ``W`` are ignored. Solves
    run on up to ``threads`` workers (``NEMATIC_THREADS`` by default); the
    result does not depend on the worker count.
    """
    Ls = [float(L) for L in Ls]
    if len(Ls) < 3:
        raise DomainError("a convergence study needs at least 3 values of L")
    if not w > 0.0:
        raise DomainError(f"anchoring ratio must be positive, got {w}")
    schedule = schedule or StepSchedule()
    ref = q0_field(g, QuadrupolarConfig(w, material.s_star))

    def run(L):
        W = math.inf if math.isinf(w) else w * L
        p = MaterialParams(material.a, material.b, material.c, L=L, W=W)
        F, rep = relax(initial_field(p, g), p, g, schedule)
        if not rep.converged:
            raise DivergenceError(f"solve at L={L:g} failed: {rep.message}")
        return StudyRun(L, sup_error(F, ref, g, r_max), F, rep)

    n = min(threads or worker_count(), len(Ls))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            runs = list(ex.map(run, Ls))
    else:
        runs = [run(L) for L in Ls]
    return ConvergenceStudy(fit_rate(Ls, [r.error for r in runs]), runs)


# ---------------------------------------------------------------------------
# eigenvalue exchange along the equator


@dataclass(frozen=True)
class ExchangeProfile:
    """Rows ``(r, lambda1, lambda2, lambda3, biaxiality)`` and the exchange radius, if any."""

    table: np.ndarray
    crossing: float | None
    min_gap: float


def _equator_components(F: AxiQField, g: ExteriorGrid, radii) -> np.ndarray:
    j0, j1, t = g.equator_columns()
    col = (1.0 - t) * F.m[:, j0] + t * F.m[:, j1]
    return np.stack([g.interpolate_rows(col, float(r)) for r in radii])


def eigenvalue_exchange_profile(source, radii, tol: float = 1e-8, grid: ExteriorGrid | None = None) -> ExchangeProfile:
    """Eigenvalues and biaxiality along the equatorial ray ``phi = pi/2``.

    ``source`` is a :class:`QuadrupolarConfig` (closed form) or an
    :class:`AxiQField` on ``grid``. The exchange radius is where the
    ``e_z`` and ``e_rho`` eigenvalues trade places while both lead; for a
    configuration it is solved to machine precision, for a field it is
    interpolated between the sampled radii.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0.0):
        raise DomainError("radii must be a strictly increasing 1-D list")
    if radii[0] < 1.0:
        raise DomainError("radii must lie outside the particle")
    if isinstance(source, QuadrupolarConfig):
        cfg = source
        lam = q0_eigenvalues(radii, 0.5 * math.pi, cfg)
        m = np.stack(q0_components(radii, np.full_like(radii, 0.5 * math.pi), cfg), axis=-1)
    elif isinstance(source, AxiQField):
        if grid is None:
            raise DomainError("a grid is required for a field source")
        source.check_shape(grid)
        m = _equator_components(source, grid, radii)
        lam = eigenvalues_sorted(cylindrical_matrix(m))
    else:
        raise DomainError(f"unsupported source {type(source).__name__}")
    lam = np.array(lam)
    lam[:, 2] = -(lam[:, 0] + lam[:, 1])
    beta = biaxiality_array(cylindrical_matrix(m))
    table = np.column_stack([radii, lam, beta])
    gap = lam[:, 0] - lam[:, 1]

    # signed e_z minus e_rho eigenvalue; on the equator m_rz vanishes by symmetry
    d = (-m[:, 0] - m[:, 1]) - m[:, 0]
    leading = np.minimum(-m[:, 0] - m[:, 1], m[:, 0]) >= m[:, 1] - tol
    crossing = None
    idx = np.nonzero((np.sign(d[:-1]) != np.sign(d[1:])) & leading[:-1] & leading[1:])[0]
    if idx.size:
        k = int(idx[0])
        if isinstance(source, QuadrupolarConfig):
            crossing = float(
                brentq(lambda r: float(cfg.beta(r) - cfg.alpha(r)), radii[k], radii[k + 1], xtol=1e-15, rtol=1e-15)
            )
        else:
            t = d[k] / (d[k] - d[k + 1])
            crossing = float(radii[k] + t * (radii[k + 1] - radii[k]))
    elif np.any(gap <= tol):
        crossing = float(radii[int(np.argmin(gap))])
    return ExchangeProfile(table, crossing, float(np.min(gap)))
