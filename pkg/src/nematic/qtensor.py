"""Algebra on symmetric traceless 3x3 tensors (Q-tensors).

Tensors are stored as 5 coordinates in the orthonormal basis ``A1..A5`` of
the space of symmetric traceless matrices::

    A1 = sqrt(3/2) (ez ez - I/3)     A2 = (ex ex - ey ey) / sqrt(2)
    A3 = (ex ey + ey ex) / sqrt(2)   A4 = (ex ez + ez ex) / sqrt(2)
    A5 = (ey ez + ez ey) / sqrt(2)

The vectorised helpers (``potential``, ``potential_gradient``,
``potential_hessian``, ``potential_difference``) act on arrays of 3x3
matrices with shape ``(..., 3, 3)`` and are what the field solvers use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "BASIS",
    "EigenSystem",
    "MaterialParams",
    "QTensor",
    "biaxiality",
    "bulk_gradient",
    "bulk_potential",
    "dist_to_ustar",
    "eigen_system",
    "from_director",
    "s_star",
]

_R2 = math.sqrt(2.0)
_EX, _EY, _EZ = np.eye(3)

BASIS = np.array(
    [
        math.sqrt(1.5) * (np.outer(_EZ, _EZ) - np.eye(3) / 3.0),
        (np.outer(_EX, _EX) - np.outer(_EY, _EY)) / _R2,
        (np.outer(_EX, _EY) + np.outer(_EY, _EX)) / _R2,
        (np.outer(_EX, _EZ) + np.outer(_EZ, _EX)) / _R2,
        (np.outer(_EY, _EZ) + np.outer(_EZ, _EY)) / _R2,
    ]
)
BASIS.setflags(write=False)


def s_star(a: float, b: float, c: float) -> float:
    """Scalar order parameter of the uniaxial minimisers of the bulk potential."""
    _check_coefficients(a, b, c)
    return (b + math.sqrt(b * b + 24.0 * a * c)) / (4.0 * c)


def _check_coefficients(a: float, b: float, c: float) -> None:
    if not (a >= 0.0 and b > 0.0 and c > 0.0):
        raise DomainError(f"need a >= 0, b > 0, c > 0; got a={a}, b={b}, c={c}")
    if not all(math.isfinite(v) for v in (a, b, c)):
        raise DomainError("bulk coefficients must be finite")


@dataclass(frozen=True)
class MaterialParams:
    """Bulk constants, elastic constant and anchoring strength.

    Lengths are scaled by the particle radius, so ``L`` is the squared ratio
    of the nematic correlation length to the radius. ``W = inf`` selects
    strong (Dirichlet) anchoring; ``W = 0`` switches anchoring off.
    """

    a: float
    b: float
    c: float
    L: float = 1.0
    W: float = math.inf
    s_star: float = field(init=False)
    C0: float = field(init=False)

    def __post_init__(self):
        _check_coefficients(self.a, self.b, self.c)
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise DomainError(f"elastic constant L must be positive and finite, got {self.L}")
        if not self.W >= 0.0:
            raise DomainError(f"anchoring strength W must be >= 0, got {self.W}")
        s = s_star(self.a, self.b, self.c)
        t2 = 2.0 * s * s / 3.0
        t3 = 2.0 * s**3 / 9.0
        c0 = -(-0.5 * self.a * t2 - self.b * t3 / 3.0 + 0.25 * self.c * t2 * t2)
        object.__setattr__(self, "s_star", s)
        object.__setattr__(self, "C0", c0)

    @property
    def strong_anchoring(self) -> bool:
        return math.isinf(self.W)

    @property
    def q_infinity(self) -> "QTensor":
        return from_director(_EZ, self.s_star)


@dataclass(frozen=True, eq=False)
class QTensor:
    """A symmetric traceless tensor given by its coordinates in ``A1..A5``."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(5)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_matrix(cls, m) -> "QTensor":
        m = np.asarray(m, dtype=float)
        sym = 0.5 * (m + m.T)
        return cls(np.einsum("kij,ij->k", BASIS, sym))

    @classmethod
    def zero(cls) -> "QTensor":
        return cls(np.zeros(5))

    @property
    def matrix(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.u, BASIS)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.u))

    def rotated(self, R) -> "QTensor":
        """Return ``R^T Q R``."""
        R = np.asarray(R, dtype=float)
        return QTensor.from_matrix(R.T @ self.matrix @ R)

    def __add__(self, other: "QTensor") -> "QTensor":
        return QTensor(self.u + other.u)

    def __sub__(self, other: "QTensor") -> "QTensor":
        return QTensor(self.u - other.u)

    def __mul__(self, k: float) -> "QTensor":
        return QTensor(self.u * k)

    __rmul__ = __mul__

    def to_record(self) -> tuple:
        return tuple(float(x) for x in self.u)

    @classmethod
    def from_record(cls, rec) -> "QTensor":
        return cls(np.asarray(rec, dtype=float))

    def __repr__(self):
        return f"QTensor(u={np.array2string(self.u, precision=6)})"


def _as_matrix(Q) -> np.ndarray:
    return Q.matrix if isinstance(Q, QTensor) else np.asarray(Q, dtype=float)


# ---------------------------------------------------------------------------
# bulk potential, vectorised over (..., 3, 3)


def _tr2(M):
    return np.einsum("...ij,...ij->...", M, M)


def _tr3(M):
    return np.einsum("...ij,...jk,...ki->...", M, M, M)


def potential(M: np.ndarray, p: MaterialParams) -> np.ndarray:
    t2 = _tr2(M)
    return -0.5 * p.a * t2 - p.b * _tr3(M) / 3.0 + 0.25 * p.c * t2 * t2 + p.C0


def potential_gradient(M: np.ndarray, p: MaterialParams) -> np.ndarray:
    t2 = _tr2(M)[..., None, None]
    M2 = M @ M
    eye = np.eye(3)
    return -p.a * M - p.b * (M2 - t2 * eye / 3.0) + p.c * t2 * M


def potential_hessian(M: np.ndarray, basis: np.ndarray, p: MaterialParams) -> np.ndarray:
    """Hessian of ``f`` in the coordinates of an orthonormal ``basis`` (k, 3, 3).

    Returns an array ``(..., k, k)``. ``basis`` must span a subspace that is
    invariant under ``Q -> Q^2 - |Q|^2 I/3`` for the result to be the exact
    restricted Hessian (true for the full space and the axisymmetric one).
    """
    t2 = _tr2(M)[..., None, None, None]
    eye = np.eye(3)
    B = basis
    MB = np.einsum("...ij,ljk->...lik", M, B)
    BM = np.einsum("lij,...jk->...lik", B, M)
    trMB = np.einsum("...ij,lij->...l", M, B)
    d2 = (
        -p.a * B
        - p.b * (MB + BM - (2.0 / 3.0) * trMB[..., None, None] * eye)
        + p.c * (t2 * B + 2.0 * trMB[..., None, None] * M[..., None, :, :])
    )
    return np.einsum("kij,...lij->...kl", B, d2)


def potential_difference(M: np.ndarray, D: np.ndarray, p: MaterialParams) -> np.ndarray:
    """``f(M + D) - f(M)`` evaluated without cancellation for small ``D``."""
    dt2 = np.einsum("...ij,...ij->...", D, 2.0 * M + D)
    M2 = M @ M
    D2 = D @ D
    dt3 = (
        3.0 * np.einsum("...ij,...ij->...", M2, D)
        + 3.0 * np.einsum("...ij,...ij->...", M, D2)
        + np.einsum("...ij,...ji->...", D2, D)
    )
    t2 = _tr2(M)
    return -0.5 * p.a * dt2 - p.b * dt3 / 3.0 + 0.25 * p.c * dt2 * (2.0 * t2 + dt2)


def bulk_potential(Q, p: MaterialParams) -> float:
    """Quartic Landau-de Gennes bulk potential, shifted so that its minimum is 0."""
    return float(potential(_as_matrix(Q), p))


def bulk_gradient(Q, p: MaterialParams) -> QTensor:
    """Gradient of the bulk potential on the traceless symmetric space."""
    return QTensor.from_matrix(potential_gradient(_as_matrix(Q), p))


# ---------------------------------------------------------------------------
# eigen-decomposition


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues sorted descending and the matching orthonormal frame.

    ``frame[i]`` is the unit eigenvector for ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    frame: np.ndarray

    @property
    def leading(self) -> np.ndarray:
        return self.frame[0]


_DISC_TOL = 1e-12
_DEGENERATE_TOL = 1e-12




def _jacobi(M: np.ndarray, sweeps: int = 50):
    """Cyclic Jacobi diagonalisation of a symmetric 3x3 matrix."""
    A = np.array(M, dtype=float)
    V = np.eye(3)
    for _ in range(sweeps):
        off = A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2
        if off <= 1e-300 or off <= (1e-36 * np.sum(A * A)):
            break
        for i, j in ((0, 1), (0, 2), (1, 2)):
            if A[i, j] == 0.0:
                continue
            theta = (A[j, j] - A[i, i]) / (2.0 * A[i, j])
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            J = np.eye(3)
            J[i, i] = J[j, j] = c
            J[i, j] = s
            J[j, i] = -s
            A = J.T @ A @ J
            V = V @ J
    return np.diag(A).copy(), V.T.copy()


# The closed-form path runs on plain floats: a single 3x3 solve is dominated
# by per-call numpy overhead otherwise.


def _closed_form_eigenvalues(m, scale: float):
    """Trigonometric solution of the characteristic cubic of a traceless matrix ``m`` (nested lists)."""
    p = scale / math.sqrt(6.0)
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    r = min(1.0, max(-1.0, det / (2.0 * p * p * p)))
    phi = math.acos(r) / 3.0
    lam1 = 2.0 * p * math.cos(phi)
    lam3 = 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return [lam1, -lam1 - lam3, lam3], 1.0 - r * r


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _quad(m, x, y) -> float:
    return (
        x[0] * (m[0][0] * y[0] + m[0][1] * y[1] + m[0][2] * y[2])
        + x[1] * (m[1][0] * y[0] + m[1][1] * y[1] + m[1][2] * y[2])
        + x[2] * (m[2][0] * y[0] + m[2][1] * y[1] + m[2][2] * y[2])
    )


def _isolated_vector(m, lam: float):
    A = [[m[i][j] - (lam if i == j else 0.0) for j in range(3)] for i in range(3)]
    crosses = [_cross(A[0], A[1]), _cross(A[0], A[2]), _cross(A[1], A[2])]
    norms = [c[0] * c[0] + c[1] * c[1] + c[2] * c[2] for c in crosses]
    k = max(range(3), key=norms.__getitem__)
    n = math.sqrt(norms[k])
    return [x / n for x in crosses[k]]


def _sign_convention(v):
    # largest-magnitude component positive
    k = max(range(3), key=lambda i: abs(v[i]))
    return [-x for x in v] if v[k] < 0 else v


def _complement_pair(m, v):
    """Diagonalise ``m`` on the plane orthogonal to ``v`` (exact 2x2 rotation)."""
    k = min(range(3), key=lambda i: abs(v[i]))
    a = [-v[k] * x for x in v]
    a[k] += 1.0
    n = math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
    a = [x / n for x in a]
    b = _cross(v, a)
    angle = 0.5 * math.atan2(2.0 * _quad(m, a, b), _quad(m, a, a) - _quad(m, b, b))
    c, s = math.cos(angle), math.sin(angle)
    w1 = [c * x + s * y for x, y in zip(a, b)]
    w2 = [c * y - s * x for x, y in zip(a, b)]
    l1, l2 = _quad(m, w1, w1), _quad(m, w2, w2)
    if l1 < l2:
        return (l2, w2), (l1, w1)
    return (l1, w1), (l2, w2)


def _gram_schmidt_group(frame: np.ndarray, idx: list) -> None:
    """Replace frame vectors in a degenerate group by projected canonical axes."""
    P = sum(np.outer(frame[i], frame[i]) for i in idx)
    chosen = []
    for e in np.eye(3):
        v = P @ e
        for w in chosen:
            v = v - np.dot(v, w) * w
        n = np.linalg.norm(v)
        if n > 1e-8:
            chosen.append(v / n)
        if len(chosen) == len(idx):
            break
    for i, v in zip(idx, chosen):
        frame[i] = v


def eigen_system(Q) -> EigenSystem:
    """Eigenvalues (descending) and orthonormal eigenframe of a Q-tensor.

    Uses the trigonometric closed form, switching to cyclic Jacobi when the
    cubic is within ``1e-12`` of a repeated root. Inside a degenerate
    eigenspace the frame is built by Gram-Schmidt on the canonical axes.
    """
    raw = _as_matrix(Q).tolist()
    m = [[0.5 * (raw[i][j] + raw[j][i]) for j in range(3)] for i in range(3)]
    scale = math.sqrt(sum(x * x for row in m for x in row))
    if scale < 1e-300:
        return EigenSystem(np.zeros(3), np.eye(3))
    lam, disc = _closed_form_eigenvalues(m, scale)
    if disc < _DISC_TOL:
        vals, vecs = _jacobi(np.array(m))
        order = np.argsort(-vals, kind="stable")
        lam = vals[order].tolist()
        vectors = vecs[order].tolist()
    else:
        # the eigenvalue farthest from the other two is the best conditioned
        iso = 0 if lam[0] - lam[1] >= lam[1] - lam[2] else 2
        v = _isolated_vector(m, lam[iso])
        (l1, w1), (l2, w2) = _complement_pair(m, v)
        if iso == 0:
            lam, vectors = [_quad(m, v, v), l1, l2], [v, w1, w2]
        else:
            lam, vectors = [l1, l2, _quad(m, v, v)], [w1, w2, v]
    frame = np.array([_sign_convention(f) for f in vectors])
    tol = _DEGENERATE_TOL * max(1.0, scale)
    groups, cur = [], [0]
    for i in (1, 2):
        if lam[cur[-1]] - lam[i] <= tol:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    for g in groups:
        if len(g) > 1:
            _gram_schmidt_group(frame, g)
    return EigenSystem(np.asarray(lam, dtype=float), frame)


def eigenvalues_sorted(M: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of a stack of symmetric matrices ``(..., 3, 3)``."""
    return np.linalg.eigvalsh(M)[..., ::-1]


# ---------------------------------------------------------------------------
# uniaxial / biaxial diagnostics


def biaxiality(Q) -> float:
    """``1 - 6 (tr Q^3)^2 / |Q|^6``, in [0, 1]; ``nan`` for ``|Q| < 1e-14``."""
    return float(biaxiality_array(_as_matrix(Q)))


def biaxiality_array(M: np.ndarray) -> np.ndarray:
    t2 = _tr2(M)
    t3 = _tr3(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = 1.0 - 6.0 * t3 * t3 / t2**3
    beta = np.clip(beta, 0.0, 1.0)
    return np.where(np.sqrt(t2) < 1e-14, np.nan, beta)


def dist_to_ustar(Q, p: MaterialParams) -> float:
    """Frobenius distance from ``Q`` to the vacuum manifold ``s*(n n - I/3)``.

    The nearest point uses the leading eigenvector; when the top eigenvalue
    is repeated any leading direction gives the same distance.
    """
    return float(dist_to_ustar_array(_as_matrix(Q), p.s_star))


def dist_to_ustar_array(M: np.ndarray, s: float) -> np.ndarray:
    # |Q - s(nn - I/3)|^2 = |Q|^2 - 2 s n.Qn + 2 s^2 / 3, maximised at the top eigenvector
    lam1 = eigenvalues_sorted(M)[..., 0]
    d2 = _tr2(M) - 2.0 * s * lam1 + 2.0 * s * s / 3.0
    return np.sqrt(np.maximum(d2, 0.0))


def from_director(n, s: float) -> QTensor:
    """Uniaxial tensor ``s (n n - I/3)`` for a unit vector ``n``."""
    n = np.asarray(n, dtype=float).reshape(3)
    if abs(np.linalg.norm(n) - 1.0) > 1e-10:
        raise DomainError(f"director must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return QTensor.from_matrix(s * (np.outer(n, n) - np.eye(3) / 3.0))
