"""Axisymmetric harmonic maps outside the particle and their axis defects.

With ``n = sin(psi) e_rho + cos(psi) e_z`` the Dirichlet energy per azimuthal
radian is

    E(psi) = int (|grad psi|^2 + sin^2(psi) / rho^2) rho drho dz,

minimised with ``psi = phi`` on the particle (radial anchoring) and a fixed
far-field value. On the symmetry axis ``psi`` only takes the values 0 and
pi; a point defect is a place where the axis value switches.

Axis values are not unknowns. Each one is the element of ``{0, pi}`` nearest
to the value in the adjacent off-axis column, which keeps the discrete
energy continuous. Edges running along the axis carry no energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid

from .errors import DomainError
from .fields import AxiQField, ExteriorGrid, PsiField
from .ldg_relax import edge_form
from .qtensor import MaterialParams
from .solver import Problem, SolveReport, StepSchedule, relax_problem

HEDGEHOG_DEPTH = 1.26
INITIALISATIONS = ("boundary-decay", "hedgehog-below", "uniform-0")
_LOW, _HIGH = 0.25 * math.pi, 0.75 * math.pi


# ---------------------------------------------------------------------------
# discrete energy


def _axis_free_edges(g: ExteriorGrid):
    B, w, _ = edge_form(g, 0)
    B = B.tocsr()
    on_axis = np.zeros(g.n_s * g.n_phi, dtype=bool)
    idx = np.arange(g.n_s * g.n_phi).reshape(g.shape)
    on_axis[idx[:, [0, -1]].ravel()] = True
    both = np.asarray((abs(B) @ on_axis.astype(float))).ravel() == 2.0
    w = np.where(both, 0.0, w)
    return B, w


def snap_axis(psi: np.ndarray) -> np.ndarray:
    """Copy of ``psi`` with both axis columns set to the nearest of ``{0, pi}`` to their neighbours."""
    out = np.array(psi, dtype=float)
    for j, adj in ((0, 1), (-1, -2)):
        out[:, j] = np.where(out[:, adj] < 0.5 * math.pi, 0.0, math.pi)
    return out


def _with_boundary_axis(psi: np.ndarray) -> np.ndarray:
    # interior rows are snapped; the two boundary rows keep their prescribed values
    out = snap_axis(psi)
    out[0, [0, -1]] = psi[0, [0, -1]]
    out[-1, [0, -1]] = psi[-1, [0, -1]]
    return out


class _PsiProblem(Problem):
    def __init__(self, g: ExteriorGrid, template: np.ndarray):
        self.g = g
        self.B, self.w = _axis_free_edges(g)
        self.K = (self.B.T @ sp.diags(self.w) @ self.B).tocsr()
        pot = np.zeros(g.shape)
        pot[:, 1:-1] = g.w2[:, None] * g.area[None, 1:-1] / g.sin_phi[None, 1:-1] ** 2
        self.pot = pot
        free = np.zeros(g.shape, dtype=bool)
        free[1:-1, 1:-1] = True
        self.free = free.ravel()
        self.template = np.array(template, dtype=float).ravel()
        self.mass = 2.0 * g.volume.ravel()[self.free]

    def full(self, x) -> np.ndarray:
        psi = self.template.copy()
        psi[self.free] = x
        return _with_boundary_axis(psi.reshape(self.g.shape))

    def unknowns(self, psi):
        return np.asarray(psi, dtype=float).ravel()[self.free].copy()

    def energy_full(self, psi):
        u = psi.ravel()
        du = self.B @ u
        return float(np.sum(self.w * du * du)) + float(np.sum(self.pot * np.sin(psi) ** 2))

    def energy(self, x):
        return self.energy_full(self.full(x))

    def energy_change(self, x, x_new):
        a, b = self.full(x), self.full(x_new)
        d = b - a
        Bd, Ba = self.B @ d.ravel(), self.B @ a.ravel()
        return float(np.sum(self.w * Bd * (2.0 * Ba + Bd))) + float(np.sum(self.pot * np.sin(d) * np.sin(a + b)))

    def gradient_full(self, psi):
        G = 2.0 * (self.K @ psi.ravel()) + (self.pot * np.sin(2.0 * psi)).ravel()
        return G.reshape(self.g.shape)

    def gradient(self, x):
        return self.gradient_full(self.full(x)).ravel()[self.free]

    def operator(self, x, mode):
        if mode == "explicit":
            return None
        A = 2.0 * self.K[self.free][:, self.free]
        if mode == "newton":
            psi = self.full(x).ravel()[self.free]
            A = A + sp.diags(2.0 * self.pot.ravel()[self.free] * np.cos(2.0 * psi))
        return A.tocsr()

    def project(self, x):
        return np.clip(x, 0.0, math.pi)

    def node_residual(self, psi):
        """``|-lap psi + sin(2 psi) / (2 rho^2)|`` with bound-active nodes counted as 0."""
        G = self.gradient_full(psi)
        blocked = ((psi <= 0.0) & (G > 0.0)) | ((psi >= math.pi) & (G < 0.0))
        R = np.abs(G) / (2.0 * self.g.volume)
        R[blocked] = 0.0
        R[:, [0, -1]] = 0.0
        return R

    def residual(self, x):
        return float(np.max(self.node_residual(self.full(x))[1:-1]))


def psi_energy(F: PsiField, g: ExteriorGrid) -> float:
    """Discrete ``E(psi)`` on the truncated domain (per azimuthal radian).

    Edge differences with exact dual-cell metric weights for the gradient
    term and node quadrature of ``sin^2(psi)/rho^2`` off the axis. Axis
    values are re-derived from the adjacent column before evaluation.
    """
    F.check_shape(g)
    prob = _PsiProblem(g, F.psi)
    return prob.energy_full(_with_boundary_axis(F.psi))


def psi_residual(F: PsiField, g: ExteriorGrid) -> float:
    """Max over interior off-axis nodes of the residual of the ``psi`` equation."""
    F.check_shape(g)
    prob = _PsiProblem(g, F.psi)
    return float(np.max(prob.node_residual(_with_boundary_axis(F.psi))[1:-1]))


# ---------------------------------------------------------------------------
# initial data and relaxation


def mirror(F: PsiField) -> PsiField:
    """z-reflection: ``psi'(r, phi) = pi - psi(r, pi - phi)``."""
    return PsiField(math.pi - F.psi[:, ::-1])


def initial_psi(g: ExteriorGrid, kind: str = "boundary-decay", far_field: float = 0.0, rate: float = 5.0) -> PsiField:
    """Starting fields with ``psi = phi`` on the particle and the far-field value outside.

    ``"boundary-decay"`` is ``phi exp(-rate (r - 1))``; ``"hedgehog-below"``
    seeds an axis jump at ``z = -1.26``; ``"uniform-0"`` is 0 off the
    particle. ``far_field = pi`` returns the z-mirror of the same start.
    """
    if far_field not in (0.0, math.pi):
        raise DomainError(f"far-field value must be 0 or pi, got {far_field}")
    if far_field == math.pi:
        return mirror(initial_psi(g, kind, 0.0, rate))
    r, phi = g.r[:, None], g.phi[None, :]
    if kind == "boundary-decay":
        psi = phi * np.exp(-rate * (r - 1.0))
    elif kind == "hedgehog-below":
        phi_p = np.arctan2(g.rho, g.z + HEDGEHOG_DEPTH)
        psi = phi - phi_p * (1.0 - np.exp(-1.0 * (r - 1.0)))
    elif kind == "uniform-0":
        psi = np.zeros(g.shape)
    else:
        raise DomainError(f"unknown initialisation {kind!r}; expected one of {INITIALISATIONS}")
    psi = np.clip(np.broadcast_to(psi, g.shape), 0.0, math.pi).copy()
    psi[0] = g.phi
    psi[-1] = 0.0
    return PsiField(_with_boundary_axis(psi))


def psi_relax(F0: PsiField, g: ExteriorGrid, schedule: StepSchedule | None = None, far_field: float = 0.0):
    """Minimise ``E`` from ``F0`` by projected gradient flow; returns ``(PsiField, SolveReport)``.

    The particle row is set to ``phi`` and the outer row to ``far_field``;
    every step is clamped to ``[0, pi]``.
    """
    schedule = schedule or StepSchedule()
    F0.check_shape(g)
    if far_field not in (0.0, math.pi):
        raise DomainError(f"far-field value must be 0 or pi, got {far_field}")
    psi0 = np.clip(np.array(F0.psi), 0.0, math.pi)
    psi0[0] = g.phi
    psi0[-1] = far_field
    prob = _PsiProblem(g, psi0)
    x, report = relax_problem(prob, prob.unknowns(psi0), schedule)
    F = PsiField(prob.full(x))
    report.sup_norm = float(np.max(np.abs(F.psi)))
    return F, report


@dataclass
class Branch:
    """One start of a multi-start minimisation."""

    init: str
    field: PsiField
    report: SolveReport

    @property
    def energy(self) -> float:
        return self.report.final_energy


@dataclass
class MultiStartResult:
    best: Branch
    branches: list = field(default_factory=list)


def solve_multistart(
    g: ExteriorGrid,
    schedule: StepSchedule | None = None,
    inits=INITIALISATIONS,
    far_field: float = 0.0,
) -> MultiStartResult:
    """Relax every start in ``inits`` and keep the lowest-energy converged branch.

    Ties are broken by the order of ``inits``. Raises
    :class:`~nematic.errors.DivergenceError` if no start converges.
    """
    from .errors import DivergenceError

    branches = []
    for kind in inits:
        F, rep = psi_relax(initial_psi(g, kind, far_field), g, schedule, far_field)
        branches.append(Branch(kind, F, rep))
    ok = [b for b in branches if b.report.converged]
    if not ok:
        raise DivergenceError("no initialisation converged: " + "; ".join(b.report.message for b in branches))
    best = min(ok, key=lambda b: b.energy)
    return MultiStartResult(best, branches)


# ---------------------------------------------------------------------------
# defects and degree


@dataclass(frozen=True)
class Defect:
    z0: float
    jump: int


@dataclass(frozen=True)
class DefectCensus:
    """Axis defects sorted by ``z0``; ``unresolved`` lists ``(z_lo, z_hi)`` intervals."""

    defects: tuple = ()
    unresolved: tuple = ()

    def __len__(self) -> int:
        return len(self.defects)

    def to_record(self) -> list:
        return [{"z0": d.z0, "jump": d.jump} for d in self.defects]


def _axis_profile(F: PsiField, g: ExteriorGrid):
    """Adjacent-column values along the axis ordered by increasing ``z`` (``|z| > 1``)."""
    lower_z = -g.r[1:][::-1]
    lower = F.psi[1:, -2][::-1]
    upper_z = g.r[1:]
    upper = F.psi[1:, 1]
    return (lower_z, lower), (upper_z, upper)


def _scan_segment(z, vals, defects, unresolved):
    state = np.where(vals < _LOW, 0, np.where(vals > _HIGH, 1, -1))
    known = np.nonzero(state >= 0)[0]
    if known.size == 0:
        unresolved.append((float(z[0]), float(z[-1])))
        return
    if known[0] > 0:
        unresolved.append((float(z[0]), float(z[known[0] - 1])))
    if known[-1] < len(z) - 1:
        unresolved.append((float(z[known[-1] + 1]), float(z[-1])))
    for a, b in zip(known[:-1], known[1:]):
        if state[a] == state[b]:
            if b > a + 1:
                unresolved.append((float(z[a + 1]), float(z[b - 1])))
            continue
        d = vals[a : b + 1] - 0.5 * math.pi
        crossings = np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]
        if crossings.size != 1:
            unresolved.append((float(z[a]), float(z[b])))
            continue
        k = a + int(crossings[0])
        t = d[k - a] / (d[k - a] - d[k - a + 1])
        z0 = float(z[k] + t * (z[k + 1] - z[k]))
        defects.append(Defect(z0, 1 if state[b] == 1 else -1))


def detect_defects(F: PsiField, g: ExteriorGrid) -> DefectCensus:
    """Locate switches of the axis value between 0 and pi on ``|z| > 1``.

    Axis nodes are classified from the adjacent column: below pi/4 is the
    0-state, above 3pi/4 the pi-state. A change of state between
    consecutive classified nodes is one defect, located where the
    adjacent-column value crosses pi/2; ``jump`` is +1 for 0 -> pi going
    up. Runs that cannot be classified are reported in ``unresolved``.
    """
    F.check_shape(g)
    defects, unresolved = [], []
    for z, vals in _axis_profile(F, g):
        _scan_segment(z, vals, defects, unresolved)
    defects.sort(key=lambda d: d.z0)
    return DefectCensus(tuple(defects), tuple(unresolved))


def _cell_dr(g: ExteriorGrid, r: float) -> float:
    return g.ds * r * r


def degree(F: PsiField, g: ExteriorGrid, r: float, census: DefectCensus | None = None) -> float:
    """``-1/2 int_0^pi psi_phi sin(psi) dphi`` on the sphere of radius ``r``.

    Rows are interpolated linearly in ``s = 1/r``; the axis values are
    snapped again after interpolation. Raises :class:`DomainError` when a
    detected defect lies within one radial cell of ``r``.
    """
    F.check_shape(g)
    if not 1.0 <= r <= g.r_out:
        raise DomainError(f"radius {r} outside [1, {g.r_out}]")
    census = detect_defects(F, g) if census is None else census
    for d in census.defects:
        if abs(abs(d.z0) - r) < _cell_dr(g, r):
            raise DomainError(f"radius {r} is within one cell of the defect at z = {d.z0:.6g}")
    row = g.interpolate_rows(F.psi, r)
    if r > 1.0:
        row = snap_axis(row[None, :])[0]
    dpsi = np.gradient(row, g.phi, edge_order=2)
    return -0.5 * float(trapezoid(dpsi * np.sin(row), g.phi))


def degree_samples(F: PsiField, g: ExteriorGrid, n: int = 8, census: DefectCensus | None = None) -> list:
    """Degrees at ``n`` radii: half between the particle and the outermost defect, half beyond.

    Without defects the radii are log-spaced in ``[1.1, R_out / 2]``.
    """
    census = detect_defects(F, g) if census is None else census
    if census.defects:
        zmax = max(abs(d.z0) for d in census.defects)
        n_in = n // 2
        inner = 1.0 + (zmax - 1.0) * np.arange(1, n_in + 1) / (n_in + 1)
        outer = np.geomspace(zmax * 1.25, 0.5 * g.r_out, n - n_in)
        radii = np.concatenate([inner, outer])
    else:
        radii = np.geomspace(1.1, 0.5 * g.r_out, n)
    return [(float(r), degree(F, g, float(r), census)) for r in radii]


def hardy_integral(F: PsiField, g: ExteriorGrid, r_min: float | None = None) -> float:
    """``int sin^2(psi) / (rho^2 + z^2) rho drho dz`` over ``r >= r_min`` (default: the outer half)."""
    F.check_shape(g)
    r_min = 0.5 * g.r_out if r_min is None else r_min
    rows = g.r >= r_min
    w = g.w2[rows, None] * g.area[None, :]
    return float(np.sum(w * np.sin(F.psi[rows]) ** 2))


def lift_to_qtensor(F: PsiField, p: MaterialParams) -> AxiQField:
    """Uniaxial field ``s* (n n - I/3)`` with ``n = sin(psi) e_rho + cos(psi) e_z``."""
    sn, cs = np.sin(F.psi), np.cos(F.psi)
    s = p.s_star
    return AxiQField(np.stack([s * (sn * sn - 1.0 / 3.0), np.full_like(sn, -s / 3.0), s * sn * cs], axis=-1))
