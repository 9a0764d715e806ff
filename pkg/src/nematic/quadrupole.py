"""Closed-form small-particle limit: the quadrupolar map and its Saturn ring.

The limiting configuration at anchoring ratio ``w`` is

    Q0 = alpha(r) (er er - I/3) + beta(r) (ez ez - I/3),
    alpha(r) = s* w/(3+w) / r^3,    beta(r) = s* (1 - w/(1+w) / r),

a harmonic map with a Robin condition on the unit sphere. Its principal
eigenvector jumps across an equatorial circle of radius ``r_w`` whenever
``w > sqrt(3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .qtensor import QTensor, biaxiality_array

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class QuadrupolarConfig:
    """Anchoring ratio ``w`` in (0, inf] and vacuum order parameter ``s_star``."""

    w: float
    s_star: float = 1.0

    def __post_init__(self):
        if not self.w > 0.0:
            raise DomainError(f"anchoring ratio w must be positive, got {self.w}")
        if not (self.s_star > 0.0 and math.isfinite(self.s_star)):
            raise DomainError(f"s_star must be positive, got {self.s_star}")

    @property
    def cw3(self) -> float:
        return 1.0 if math.isinf(self.w) else self.w / (3.0 + self.w)

    @property
    def cw1(self) -> float:
        return 1.0 if math.isinf(self.w) else self.w / (1.0 + self.w)

    def alpha(self, r):
        return self.s_star * self.cw3 / np.asarray(r, dtype=float) ** 3

    def beta(self, r):
        return self.s_star * (1.0 - self.cw1 / np.asarray(r, dtype=float))


_I3 = np.eye(3)


def q0_components(r, phi, cfg: QuadrupolarConfig):
    """Cylindrical-frame components ``(m_rr, m_tt, m_rz)`` of Q0 at ``(r, phi)``."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    al, be = cfg.alpha(r), cfg.beta(r)
    sp, cp = np.sin(phi), np.cos(phi)
    m_rr = al * (sp * sp - 1.0 / 3.0) - be / 3.0
    m_tt = -(al + be) / 3.0
    m_rz = al * sp * cp
    return tuple(np.broadcast_arrays(m_rr, m_tt, m_rz))


def q0_eval(x, cfg: QuadrupolarConfig) -> QTensor:
    """The limiting tensor at a point ``x`` with ``|x| >= 1``."""
    x = np.asarray(x, dtype=float).reshape(3)
    r = math.sqrt(float(x @ x))
    if r < 1.0 - 1e-14:
        raise DomainError(f"point lies inside the particle, |x| = {r}")
    er = x / r
    al, be = float(cfg.alpha(r)), float(cfg.beta(r))
    M = al * (er[:, None] * er) - (al + be) / 3.0 * _I3
    M[2, 2] += be
    return QTensor.from_matrix(M)


def q0_eigenvalues(r, phi, cfg: QuadrupolarConfig) -> np.ndarray:
    """Closed-form eigenvalue branches, sorted descending along the last axis."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0 - 1e-14):
        raise DomainError("q0_eigenvalues requires r >= 1")
    al, be = cfg.alpha(r), cfg.beta(r)
    sigma = al + be
    nu = al * be
    sp2 = np.sin(phi) ** 2
    # radicand written as (alpha-beta)^2/4 + nu cos^2: nonnegative term by term
    root = np.sqrt(0.25 * (al - be) ** 2 + nu * (1.0 - sp2))
    lam_a = sigma / 6.0 + root
    lam_b = sigma / 6.0 - root
    lam_c = -sigma / 3.0 + 0.0 * root
    return -np.sort(-np.stack([lam_a, lam_b, lam_c], axis=-1), axis=-1)


def ring_polynomial(w: float, r):
    """``p(w, r) = r^3 - w/(1+w) r^2 - w/(3+w)``; its root > 1 is the ring radius."""
    c1 = 1.0 if math.isinf(w) else w / (1.0 + w)
    c3 = 1.0 if math.isinf(w) else w / (3.0 + w)
    r = np.asarray(r, dtype=float)
    return r**3 - c1 * r**2 - c3


@dataclass(frozen=True)
class RingResult:
    """Saturn-ring existence and radius.

    ``r_w`` is ``None`` when there is no ring, except on the threshold
    ``w = sqrt(3)`` where the ring sits on the particle surface: then
    ``boundary`` is set and ``r_w == 1``.
    """

    exists: bool
    r_w: float | None
    residual: float
    boundary: bool = False


def ring_radius(w: float) -> RingResult:
    """Radius of the equatorial uniaxial circle of the small-particle limit."""
    if not w > 0.0:
        raise DomainError(f"anchoring ratio w must be positive, got {w}")
    if w == SQRT3:
        return RingResult(False, 1.0, abs(float(ring_polynomial(w, 1.0))), boundary=True)
    if w < SQRT3:
        return RingResult(False, None, math.nan)
    c1 = 1.0 if math.isinf(w) else w / (1.0 + w)
    lo, hi = 1.0, 2.0
    p = lambda r: ring_polynomial(w, r)  # noqa: E731
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    r = 0.5 * (lo + hi)
    for _ in range(2):
        dp = 3.0 * r * r - 2.0 * c1 * r
        r -= float(p(r)) / dp
    return RingResult(True, r, abs(float(p(r))))


def director(r: float, phi: float, cfg: QuadrupolarConfig):
    """Principal eigenvector ``n0`` of Q0 and the auxiliary ``mu``.

    ``n0`` is returned in Cartesian coordinates on the half-plane
    ``theta = 0`` (so ``e_rho = e_x``). Its ``e_z`` component is taken
    nonnegative for ``phi <= pi/2`` and mirrored below the equator.
    """
    if not 0.0 < phi < math.pi:
        raise DomainError("director is defined for 0 < phi < pi")
    if r < 1.0:
        raise DomainError("director requires r >= 1")
    al, be = float(cfg.alpha(r)), float(cfg.beta(r))
    sp2 = math.sin(phi) ** 2
    gap = 2.0 * math.sqrt(0.25 * (al - be) ** 2 + al * be * (1.0 - sp2))
    if gap <= 1e-10:
        raise DomainError(f"leading eigenvalue is degenerate at r={r}, phi={phi} (Saturn ring)")
    c2 = 1.0 - 2.0 * sp2
    mu = (al * c2 + be) / math.sqrt(al * al + be * be + 2.0 * al * be * c2)
    mu = min(1.0, max(-1.0, mu))
    nr = math.sqrt(0.5 * (1.0 - mu))
    nz = math.sqrt(0.5 * (1.0 + mu))
    if phi > 0.5 * math.pi:
        nz = -nz
    return np.array([nr, 0.0, nz]), mu


def director_projector(r: float, phi: float, cfg: QuadrupolarConfig) -> np.ndarray:
    """``n0 n0``: continuous across the equator, undefined only on the ring."""
    n, _ = director(r, phi, cfg)
    return np.outer(n, n)


def _equatorial_gap(r, cfg):
    return cfg.alpha(r) - cfg.beta(r)


def uniaxial_locus_scan(cfg: QuadrupolarConfig, r_grid, phi_grid, tol: float = 0.05):
    """Uniaxial points of Q0 away from the axis.

    Grid nodes where the biaxiality drops below ``tol`` are grouped into
    connected clusters; clusters touching the ``phi`` limits of the grid are
    the trivially uniaxial axis and are discarded. Each remaining cluster is
    polished to machine precision by a root solve of ``lambda1 - lambda2``
    along the equator. Returns a list of ``(r, phi)``.
    """
    from scipy import ndimage

    r_grid = np.asarray(r_grid, dtype=float)
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.min() <= 0.0 or phi_grid.max() >= math.pi:
        raise DomainError("phi grid must exclude the symmetry axis")
    R, P = np.meshgrid(r_grid, phi_grid, indexing="ij")
    m_rr, m_tt, m_rz = q0_components(R, P, cfg)
    beta = biaxiality_array(_cyl_matrix(m_rr, m_tt, m_rz))
    labels, n = ndimage.label(beta < tol)
    points = []
    for k in range(1, n + 1):
        ii, jj = np.nonzero(labels == k)
        if jj.min() == 0 or jj.max() == len(phi_grid) - 1:
            continue
        lo = r_grid[max(ii.min() - 1, 0)]
        hi = r_grid[min(ii.max() + 1, len(r_grid) - 1)]
        g_lo, g_hi = _equatorial_gap(lo, cfg), _equatorial_gap(hi, cfg)
        if g_lo * g_hi < 0.0:
            r = brentq(lambda x: _equatorial_gap(x, cfg), lo, hi, xtol=1e-15, rtol=1e-15)
            points.append((float(r), 0.5 * math.pi))
        else:
            best = int(np.argmin(np.where(labels == k, beta, np.inf)))
            bi, bj = np.unravel_index(best, beta.shape)
            points.append((float(r_grid[bi]), float(phi_grid[bj])))
    return sorted(set(points))


def _cyl_matrix(m_rr, m_tt, m_rz):
    m_rr = np.asarray(m_rr, dtype=float)
    M = np.zeros(m_rr.shape + (3, 3))
    M[..., 0, 0] = m_rr
    M[..., 1, 1] = m_tt
    M[..., 2, 2] = -m_rr - m_tt
    M[..., 0, 2] = M[..., 2, 0] = m_rz
    return M


def verify_harmonic_robin(cfg: QuadrupolarConfig, grid):
    """Discrete residuals of ``Delta Q0 = 0`` and of the anchoring condition.

    The interior residual is the max-norm of the axisymmetric finite
    difference Laplacian of the sampled Q0 (azimuthal ``1/rho^2`` terms
    included). The boundary residual is the max mismatch of
    ``(1/w) dQ/dnu = Qs - Q`` on ``r = 1`` with a one-sided second-order
    normal derivative, or ``|Q0 - Qs|`` for ``w = inf``.
    """
    from .fields import AxiQField, surface_field
    from .ldg_relax import laplacian

    m = np.stack(q0_components(grid.r[:, None], grid.phi[None, :], cfg), axis=-1)
    F = AxiQField(m)
    lap = laplacian(F, grid)
    interior = float(np.max(np.linalg.norm(lap[1:-1], axis=-1)))
    q = F.orthonormal()
    qs = surface_field(grid, cfg.s_star).orthonormal()[0]
    if math.isinf(cfg.w):
        boundary = float(np.max(np.linalg.norm(q[0] - qs, axis=-1)))
    else:
        dnu = (3.0 * q[0] - 4.0 * q[1] + q[2]) / (2.0 * grid.ds)
        boundary = float(np.max(np.linalg.norm(dnu / cfg.w - (qs - q[0]), axis=-1)))
    return interior, boundary
