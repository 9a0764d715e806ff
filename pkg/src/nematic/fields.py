"""Exterior-domain grid and the axisymmetric field containers.

The exterior of the unit ball is mapped to ``(s, phi)`` with ``s = 1/r``
uniform on ``[1/R_out, 1]`` and the polar angle ``phi`` uniform on
``[0, pi]``. Row 0 is the particle surface ``r = 1``; the last row is the
artificial boundary ``r = R_out``. Columns 0 and ``n_phi - 1`` lie on the
symmetry axis.

Metric weights are exact integrals over the dual cells, so quadratures of
``r^2 sin(phi)`` and ``sin(phi)`` reproduce shell volumes and areas exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError
from .qtensor import BASIS

# local cylindrical frame (e_rho, e_theta, e_z) at theta = 0 is (e_x, e_y, e_z),
# so the axisymmetric subspace is spanned by A1, A2, A4
REDUCED_BASIS = BASIS[[0, 1, 3]]
AZIMUTHAL_ORDER = (0, 2, 1)

_S6 = math.sqrt(6.0)
_S2 = math.sqrt(2.0)

OUTER_CONDITIONS = ("dirichlet", "asymptotic")


@dataclass(frozen=True)
class ExteriorGrid:
    """Tensor grid on the truncated exterior domain ``1 <= r <= r_out``.

    ``outer`` selects the truncation condition used by the Q-tensor solver:
    ``"dirichlet"`` pins ``Q = Q_inf`` on ``r = r_out``; ``"asymptotic"``
    imposes ``r dQ/dr + (Q - Q_inf) = 0`` (exact for a ``1/r`` tail).
    """

    r_out: float = 20.0
    n_s: int = 128
    n_phi: int = 96
    outer: str = "dirichlet"

    def __post_init__(self):
        if not self.r_out > 1.0:
            raise DomainError(f"r_out must exceed the particle radius 1, got {self.r_out}")
        if self.n_s < 4 or self.n_phi < 8:
            raise DomainError(f"grid too small: n_s={self.n_s}, n_phi={self.n_phi} (need >= 4, >= 8)")
        if self.outer not in OUTER_CONDITIONS:
            raise DomainError(f"unknown outer condition {self.outer!r}")

    @property
    def shape(self) -> tuple:
        return (self.n_s, self.n_phi)

    @property
    def s_min(self) -> float:
        return 1.0 / self.r_out

    @cached_property
    def ds(self) -> float:
        return (1.0 - self.s_min) / (self.n_s - 1)

    @cached_property
    def dphi(self) -> float:
        return math.pi / (self.n_phi - 1)

    @cached_property
    def s(self) -> np.ndarray:
        s = 1.0 - self.ds * np.arange(self.n_s)
        s[-1] = self.s_min
        return s

    @cached_property
    def r(self) -> np.ndarray:
        r = 1.0 / self.s
        r[0] = 1.0
        r[-1] = self.r_out
        return r

    @cached_property
    def phi(self) -> np.ndarray:
        phi = self.dphi * np.arange(self.n_phi)
        phi[-1] = math.pi
        return phi

    @cached_property
    def sin_phi(self) -> np.ndarray:
        sp = np.sin(self.phi)
        sp[0] = sp[-1] = 0.0
        return sp

    @cached_property
    def cos_phi(self) -> np.ndarray:
        return np.cos(self.phi)

    @cached_property
    def rho(self) -> np.ndarray:
        return self.r[:, None] * self.sin_phi[None, :]

    @cached_property
    def z(self) -> np.ndarray:
        return self.r[:, None] * self.cos_phi[None, :]

    def _dual_cells(self):
        lo = np.maximum(self.s - 0.5 * self.ds, self.s_min)
        hi = np.minimum(self.s + 0.5 * self.ds, 1.0)
        return lo, hi

    @cached_property
    def w2(self) -> np.ndarray:
        """Row weights: integral of ``s^-2`` over each dual cell."""
        lo, hi = self._dual_cells()
        return 1.0 / lo - 1.0 / hi

    @cached_property
    def w4(self) -> np.ndarray:
        """Row weights: integral of ``s^-4`` over each dual cell."""
        lo, hi = self._dual_cells()
        return (lo**-3 - hi**-3) / 3.0

    @cached_property
    def w0(self) -> np.ndarray:
        lo, hi = self._dual_cells()
        return hi - lo

    @cached_property
    def area(self) -> np.ndarray:
        """Column weights: integral of ``sin(phi)`` over each dual cell."""
        lo = np.maximum(self.phi - 0.5 * self.dphi, 0.0)
        hi = np.minimum(self.phi + 0.5 * self.dphi, math.pi)
        return np.cos(lo) - np.cos(hi)

    @cached_property
    def edge_sin(self) -> np.ndarray:
        """``sin`` at the midpoints between neighbouring columns."""
        return np.sin(self.phi[:-1] + 0.5 * self.dphi)

    @cached_property
    def volume(self) -> np.ndarray:
        """Node volumes per azimuthal radian (``r^2 sin(phi) dr dphi``)."""
        return self.w4[:, None] * self.area[None, :]

    def row_at(self, r: float) -> tuple:
        """Bracketing rows ``(i, i+1)`` and weight ``t`` so that ``s = (1-t) s_i + t s_{i+1}``."""
        if not 1.0 <= r <= self.r_out:
            raise DomainError(f"radius {r} outside [1, {self.r_out}]")
        x = (1.0 - 1.0 / r) / self.ds
        i = min(int(math.floor(x)), self.n_s - 2)
        return i, i + 1, x - i

    def interpolate_rows(self, values: np.ndarray, r: float) -> np.ndarray:
        """Linear interpolation in ``s`` of a node array along its first axis."""
        i, j, t = self.row_at(r)
        return (1.0 - t) * values[i] + t * values[j]

    def equator_columns(self) -> tuple:
        """Columns bracketing ``phi = pi/2`` and the interpolation weight."""
        x = 0.5 * math.pi / self.dphi
        j = int(math.floor(x))
        if j >= self.n_phi - 1:
            j = self.n_phi - 2
        return j, j + 1, x - j


def to_orthonormal(m: np.ndarray) -> np.ndarray:
    """``(m_rr, m_tt, m_rz)`` -> coordinates on ``(A1, A2, A4)`` of the local frame."""
    m = np.asarray(m, dtype=float)
    m_rr, m_tt, m_rz = m[..., 0], m[..., 1], m[..., 2]
    return np.stack([-(m_rr + m_tt) * _S6 / 2.0, (m_rr - m_tt) / _S2, _S2 * m_rz], axis=-1)


def from_orthonormal(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2]
    return np.stack([-q1 / _S6 + q2 / _S2, -q1 / _S6 - q2 / _S2, q3 / _S2], axis=-1)


def cylindrical_matrix(m: np.ndarray) -> np.ndarray:
    """Full 3x3 tensors in the frame ``(e_rho, e_theta, e_z)``."""
    m = np.asarray(m, dtype=float)
    M = np.zeros(m.shape[:-1] + (3, 3))
    M[..., 0, 0] = m[..., 0]
    M[..., 1, 1] = m[..., 1]
    M[..., 2, 2] = -m[..., 0] - m[..., 1]
    M[..., 0, 2] = M[..., 2, 0] = m[..., 2]
    return M


@dataclass(frozen=True, eq=False)
class AxiQField:
    """Axisymmetric Q-tensor field: ``(m_rr, m_tt, m_rz)`` at every node.

    The tensor at a node is ``[[m_rr, 0, m_rz], [0, m_tt, 0],
    [m_rz, 0, -m_rr - m_tt]]`` in the frame ``(e_rho, e_theta, e_z)``, so
    ``e_theta`` is always an eigenvector.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 3 or m.shape[-1] != 3:
            raise DomainError(f"field array must have shape (n_s, n_phi, 3), got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_orthonormal(cls, q) -> "AxiQField":
        return cls(from_orthonormal(q))

    @classmethod
    def uniform(cls, grid: ExteriorGrid, s: float) -> "AxiQField":
        """``Q = s (e_z e_z - I/3)`` everywhere."""
        m = np.empty(grid.shape + (3,))
        m[...] = (-s / 3.0, -s / 3.0, 0.0)
        return cls(m)

    @property
    def shape(self) -> tuple:
        return self.m.shape[:2]

    def orthonormal(self) -> np.ndarray:
        return to_orthonormal(self.m)

    def matrices(self) -> np.ndarray:
        return cylindrical_matrix(self.m)

    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.orthonormal(), axis=-1)

    def axis_defect(self) -> float:
        """Largest violation of ``m_rz = 0``, ``m_rr = m_tt`` on the axis columns."""
        ax = self.m[:, [0, -1], :]
        return float(max(np.max(np.abs(ax[..., 2])), np.max(np.abs(ax[..., 0] - ax[..., 1]))))

    def check_shape(self, grid: ExteriorGrid) -> None:
        if self.shape != grid.shape:
            raise DomainError(f"field shape {self.shape} does not match grid {grid.shape}")


def surface_field(grid: ExteriorGrid, s: float) -> AxiQField:
    """The radial map ``Q_s = s (e_r e_r - I/3)`` sampled on every node."""
    sp, cp = grid.sin_phi, grid.cos_phi
    row = np.stack([s * (sp * sp - 1.0 / 3.0), np.full_like(sp, -s / 3.0), s * sp * cp], axis=-1)
    return AxiQField(np.broadcast_to(row, grid.shape + (3,)))


@dataclass(frozen=True, eq=False)
class PsiField:
    """Angle ``psi`` of the axisymmetric director ``n = sin(psi) e_rho + cos(psi) e_z``.

    Values on the axis columns are not unknowns: they are the nearest of
    ``{0, pi}`` to the adjacent off-axis column.
    """

    psi: np.ndarray

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        if psi.ndim != 2:
            raise DomainError(f"psi must be a 2-D node array, got shape {psi.shape}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def shape(self) -> tuple:
        return self.psi.shape

    def check_shape(self, grid: ExteriorGrid) -> None:
        if self.shape != grid.shape:
            raise DomainError(f"field shape {self.shape} does not match grid {grid.shape}")

    def director(self) -> np.ndarray:
        """``(n_rho, n_theta, n_z)`` at every node."""
        return np.stack([np.sin(self.psi), np.zeros_like(self.psi), np.cos(self.psi)], axis=-1)
