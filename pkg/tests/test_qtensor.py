import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nematic.errors import DomainError
from nematic.qtensor import (
    BASIS,
    MaterialParams,
    QTensor,
    biaxiality,
    bulk_gradient,
    bulk_potential,
    dist_to_ustar,
    eigen_system,
    from_director,
    s_star,
)

EZ = np.array([0.0, 0.0, 1.0])
finite = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)
coords = arrays(float, 5, elements=finite)
unit_dirs = arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1)


# ---------------------------------------------------------------- oracles


def s_star_decimal(a, b, c, digits=40):
    getcontext().prec = digits
    a, b, c = Decimal(a), Decimal(b), Decimal(c)
    return (b + (b * b + 24 * a * c).sqrt()) / (4 * c)


def uniaxial_slope(s, a, b, c):
    # d/ds of f(s (nn - I/3)) with tr Q^2 = 2s^2/3, tr Q^3 = 2s^3/9
    return -2 * a * s / 3 - 2 * b * s * s / 9 + 4 * c * s**3 / 9


def jacobi_eigen(M, sweeps=100):
    A = np.array(M, dtype=float)
    V = np.eye(3)
    for _ in range(sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(3) for j in range(3) if i != j))
        if off < 1e-15:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if abs(A[p, q]) < 1e-300:
                continue
            theta = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
            c, s = math.cos(theta), math.sin(theta)
            J = np.eye(3)
            J[p, p] = J[q, q] = c
            J[p, q], J[q, p] = s, -s
            A = J.T @ A @ J
            V = V @ J
    order = np.argsort(-np.diag(A))
    return np.diag(A)[order], V[:, order].T


def fibonacci_sphere(n):
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    t = math.pi * (1 + 5**0.5) * k
    rho = np.sqrt(1 - z * z)
    return np.stack([rho * np.cos(t), rho * np.sin(t), z], axis=1)


def random_tensor(rng, scale=2.0):
    u = rng.normal(size=5)
    return QTensor(u / np.linalg.norm(u) * scale * rng.uniform(0.05, 1.0))


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    return Q if np.linalg.det(Q) > 0 else -Q


# ---------------------------------------------------------------- s_star and params


def test_s_star_trivial():
    assert s_star(0, 2, 1) == 1.0


@pytest.mark.parametrize("a,b,c,approx", [(1, 2, 1, 1.822876), (3, 4, 4, (4 + math.sqrt(304)) / 16)])
def test_s_star_matches_high_precision_and_is_stationary(a, b, c, approx):
    ref = s_star_decimal(a, b, c)
    got = s_star(a, b, c)
    assert abs(Decimal(got) - ref) < Decimal("1e-15")
    assert got == pytest.approx(approx, abs=1e-6)
    assert abs(float(uniaxial_slope(ref, *(Decimal(x) for x in (a, b, c))))) < 1e-10
    # the vectorised potential agrees: the one-sided slopes straddle zero
    p = MaterialParams(a, b, c)
    h = 1e-6
    f = lambda s: bulk_potential(from_director(EZ, s), p)  # noqa: E731
    assert abs((f(got + h) - f(got - h)) / (2 * h)) < 1e-8


@pytest.mark.parametrize("bad", [(-1, 1, 1), (1, 0, 1), (1, 1, 0), (1, -1, 1)])
def test_invalid_coefficients_rejected(bad):
    with pytest.raises(DomainError):
        s_star(*bad)
    with pytest.raises(DomainError):
        MaterialParams(*bad)


def test_material_rejects_nonpositive_L():
    with pytest.raises(DomainError):
        MaterialParams(1, 1, 1, L=0.0)


def test_potential_vanishes_on_vacuum(rng):
    for a, b, c in [(1, 1, 1), (0, 2, 1), (3, 4, 4), (0.2, 5, 0.7)]:
        p = MaterialParams(a, b, c)
        for _ in range(20):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            assert abs(bulk_potential(from_director(n, p.s_star), p)) <= 1e-12


# ---------------------------------------------------------------- QTensor


@given(coords)
def test_matrix_is_symmetric_traceless_and_isometric(u):
    Q = QTensor(u)
    M = Q.matrix
    assert np.array_equal(M, M.T)
    assert abs(np.trace(M)) <= 1e-15 * max(1.0, np.abs(u).max())
    assert abs(np.sum(M * M) - np.sum(u * u)) <= 1e-14 * max(1.0, np.sum(u * u))
    assert np.allclose(QTensor.from_matrix(M).u, u, atol=1e-14)


def test_basis_is_orthonormal():
    G = np.einsum("aij,bij->ab", BASIS, BASIS)
    assert np.allclose(G, np.eye(5), atol=1e-15)


def test_record_round_trip():
    Q = QTensor([0.1, -0.2, 0.3, 0.4, -0.5])
    assert QTensor.from_record(Q.to_record()).u.tolist() == Q.u.tolist()


# ---------------------------------------------------------------- potential and gradient


def test_potential_examples():
    p = MaterialParams(1, 1, 1)
    assert bulk_potential(p.q_infinity, p) == pytest.approx(0.0, abs=1e-12)
    assert bulk_potential(QTensor.zero(), p) == pytest.approx(p.C0, abs=1e-15)
    s = p.s_star / 2
    trq2, trq3 = 2 * s * s / 3, 2 * s**3 / 9
    expect = -p.a / 2 * trq2 - p.b / 3 * trq3 + p.c / 4 * trq2**2 + p.C0
    got = bulk_potential(from_director(EZ, s), p)
    assert got == pytest.approx(expect, rel=1e-13)
    assert got > 0


def test_gradient_examples():
    p = MaterialParams(1, 1, 1)
    assert np.abs(bulk_gradient(p.q_infinity, p).u).max() <= 1e-12
    assert np.abs(bulk_gradient(QTensor.zero(), p).u).max() == 0.0


def central_difference_gradient(Q, p, h=1e-5):
    g = np.empty(5)
    for k in range(5):
        e = np.zeros(5)
        e[k] = h
        g[k] = (bulk_potential(QTensor(Q.u + e), p) - bulk_potential(QTensor(Q.u - e), p)) / (2 * h)
    return g


def test_gradient_matches_finite_differences(rng):
    p = MaterialParams(1, 1, 1)
    for _ in range(100):
        Q = random_tensor(rng)
        fd = central_difference_gradient(Q, p)
        an = bulk_gradient(Q, p).u
        assert np.linalg.norm(an - fd) <= 1e-6 * max(np.linalg.norm(an), 1e-3)


def test_gradient_is_traceless(rng):
    p = MaterialParams(0.5, 2.0, 1.5)
    for _ in range(20):
        G = bulk_gradient(random_tensor(rng), p).matrix
        assert abs(np.trace(G)) < 1e-13


@given(coords, st.integers(0, 2**31))
def test_frame_invariance(u, seed):
    p = MaterialParams(1, 1, 1)
    R = random_rotation(np.random.default_rng(seed))
    Q = QTensor(u)
    assert bulk_potential(Q.rotated(R), p) == pytest.approx(bulk_potential(Q, p), abs=1e-12)


# ---------------------------------------------------------------- eigen-decomposition


def test_eigen_examples():
    s = MaterialParams(1, 1, 1).s_star
    E = eigen_system(from_director(EZ, s))
    assert np.allclose(E.eigenvalues, [2 * s / 3, -s / 3, -s / 3], atol=1e-14)
    assert abs(abs(E.leading @ EZ) - 1.0) < 1e-14
    Z = eigen_system(QTensor.zero())
    assert np.array_equal(Z.eigenvalues, np.zeros(3))
    assert np.allclose(Z.frame, np.eye(3))


def test_eigen_against_jacobi_oracle(rng):
    for _ in range(1000):
        Q = random_tensor(rng)
        M = Q.matrix
        E = eigen_system(Q)
        lam, vec = jacobi_eigen(M)
        assert np.allclose(E.eigenvalues, lam, atol=1e-12)
        assert abs(E.eigenvalues.sum()) <= 1e-12
        assert np.allclose(E.frame @ E.frame.T, np.eye(3), atol=1e-12)
        for i in range(3):
            assert np.abs(M @ E.frame[i] - E.eigenvalues[i] * E.frame[i]).max() <= 1e-10
        # leading directions agree up to sign when the top eigenvalue is simple
        if lam[0] - lam[1] > 1e-6:
            assert abs(abs(E.leading @ vec[0]) - 1) < 1e-8


def test_eigen_near_degenerate_is_deterministic():
    s = 1.3
    n = np.array([1.0, 2.0, 2.0]) / 3.0
    Q = from_director(n, s) + QTensor([1e-13, 0, 0, 0, 0])
    a, b = eigen_system(Q), eigen_system(Q)
    assert np.array_equal(a.frame, b.frame)
    M = Q.matrix
    for i in range(3):
        assert np.abs(M @ a.frame[i] - a.eigenvalues[i] * a.frame[i]).max() <= 1e-10


# ---------------------------------------------------------------- biaxiality


def test_biaxiality_examples():
    assert biaxiality(QTensor.from_matrix(np.diag([1.0, 0.0, -1.0]) / math.sqrt(2))) == pytest.approx(1.0, abs=1e-15)
    assert math.isnan(biaxiality(QTensor.zero()))


@given(unit_dirs, st.floats(-3, 3).filter(lambda s: abs(s) > 1e-3))
def test_uniaxial_tensors_have_zero_biaxiality(n, s):
    n = n / np.linalg.norm(n)
    assert biaxiality(from_director(n, s)) <= 1e-12


def test_biaxiality_matches_eigenvalue_formula(rng):
    for _ in range(200):
        Q = random_tensor(rng)
        lam = np.linalg.eigvalsh(Q.matrix)
        expect = 1 - 6 * np.sum(lam**3) ** 2 / np.sum(lam**2) ** 3
        assert biaxiality(Q) == pytest.approx(min(max(expect, 0), 1), abs=1e-12)


# ---------------------------------------------------------------- distance to the vacuum manifold


def test_distance_examples():
    p = MaterialParams(1, 1, 1)
    assert dist_to_ustar(p.q_infinity, p) == pytest.approx(0.0, abs=1e-12)
    assert dist_to_ustar(QTensor.zero(), p) == pytest.approx(p.s_star * math.sqrt(2 / 3), rel=1e-15)


def test_distance_against_sampled_directions(rng):
    p = MaterialParams(1, 1, 1)
    s = p.s_star
    dirs = fibonacci_sphere(10_000)
    cands = s * (np.einsum("ni,nj->nij", dirs, dirs) - np.eye(3) / 3)
    # neighbouring samples are about 0.035 rad apart; |dQ| <= sqrt(2) s dtheta
    resolution = math.sqrt(2) * s * 0.02
    for _ in range(50):
        Q = random_tensor(rng)
        brute = np.linalg.norm(cands - Q.matrix, axis=(1, 2))
        d = dist_to_ustar(Q, p)
        assert d <= brute.min() + 1e-12
        assert brute.min() - d <= resolution


@given(coords, unit_dirs)
def test_distance_is_optimal(u, n):
    p = MaterialParams(1, 1, 1)
    Q = QTensor(u)
    other = from_director(n / np.linalg.norm(n), p.s_star)
    assert dist_to_ustar(Q, p) <= (Q - other).norm + 1e-12


# ---------------------------------------------------------------- from_director


def test_from_director_examples():
    p = MaterialParams(1, 1, 1)
    s = p.s_star
    assert np.allclose(from_director(EZ, s).u, p.q_infinity.u)
    x = np.array([0.3, -0.4, 1.2])
    er = x / np.linalg.norm(x)
    assert np.allclose(from_director(er, s).matrix, s * (np.outer(er, er) - np.eye(3) / 3), atol=1e-15)
    assert np.array_equal(from_director(er, 0.0).u, np.zeros(5))
    assert eigen_system(from_director(er, s)).eigenvalues[0] == pytest.approx(2 * s / 3, rel=1e-14)


def test_from_director_rejects_non_unit():
    with pytest.raises(DomainError):
        from_director([1.0, 1.0, 0.0], 1.0)
