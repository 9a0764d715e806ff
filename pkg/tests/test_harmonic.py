import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nematic import harmonic as h
from nematic.errors import DivergenceError, DomainError
from nematic.fields import ExteriorGrid, PsiField, surface_field
from nematic.qtensor import MaterialParams, biaxiality_array
from nematic.solver import StepSchedule

P = MaterialParams(1, 1, 1)


@pytest.fixture(scope="module")
def grid():
    return ExteriorGrid(20.0, 128, 96)


@pytest.fixture(scope="module")
def minimizers():
    out = {}
    for R in (10.0, 20.0, 40.0):
        g = ExteriorGrid(R, 128, 96)
        out[R] = (g, *h.psi_relax(h.initial_psi(g), g))
    return out


def comparison(g):
    return PsiField(np.broadcast_to(g.phi, g.shape))


# ---------------------------------------------------------------- energy


def test_zero_field_energy(grid):
    assert h.psi_energy(PsiField(np.zeros(grid.shape)), grid) == 0.0


@pytest.mark.parametrize("R", [10.0, 20.0, 40.0])
def test_comparison_field_energy(R):
    g = ExteriorGrid(R, 128, 96)
    assert h.psi_energy(comparison(g), g) == pytest.approx(4 * (R - 1), rel=1e-3)


def test_mirror_energy_invariance(grid, rng):
    for _ in range(5):
        psi = np.clip(h.initial_psi(grid).psi + 0.3 * rng.normal(size=grid.shape), 0, math.pi)
        psi[0] = grid.phi
        F = PsiField(psi)
        assert h.psi_energy(h.mirror(F), grid) == pytest.approx(h.psi_energy(F, grid), rel=1e-12)


def test_axis_snapping():
    psi = np.array([[0.3, 0.2, 2.9, 3.0], [0.1, 1.7, 1.4, 3.1]])
    out = h.snap_axis(psi)
    assert out[0, 0] == 0.0 and out[0, -1] == math.pi
    assert out[1, 0] == math.pi and out[1, -1] == 0.0
    assert np.array_equal(out[:, 1:-1], psi[:, 1:-1])


# ---------------------------------------------------------------- initial data


@pytest.mark.parametrize("kind", h.INITIALISATIONS)
def test_initial_fields(grid, kind):
    F = h.initial_psi(grid, kind)
    assert np.allclose(F.psi[0], grid.phi)
    assert np.all(F.psi[-1] == 0.0)
    assert F.psi.min() >= 0.0 and F.psi.max() <= math.pi
    M = h.initial_psi(grid, kind, math.pi)
    assert np.allclose(M.psi, h.mirror(F).psi)


def test_initial_field_errors(grid):
    with pytest.raises(DomainError):
        h.initial_psi(grid, "spiral")
    with pytest.raises(DomainError):
        h.initial_psi(grid, far_field=1.0)


# ---------------------------------------------------------------- relaxation


def test_relaxation_contract(minimizers):
    g, F, rep = minimizers[20.0]
    assert rep.converged
    assert np.all(np.diff(rep.energies) <= 0.0)
    assert F.psi.min() >= 0.0 and F.psi.max() <= math.pi
    assert np.allclose(F.psi[0], g.phi) and np.all(F.psi[-1] == 0.0)
    assert h.psi_residual(F, g) <= 1e-8
    assert h.psi_energy(F, g) == pytest.approx(rep.final_energy, rel=1e-12)


def test_clamp_holds_at_every_step(grid):
    for n in (1, 2, 3, 5):
        F, _ = h.psi_relax(h.initial_psi(grid, "hedgehog-below"), grid, StepSchedule(max_iters=n))
        assert F.psi.min() >= 0.0 and F.psi.max() <= math.pi


def test_single_defect_below_particle(minimizers):
    for R, (g, F, _) in minimizers.items():
        census = h.detect_defects(F, g)
        assert len(census) == 1 and not census.unresolved
        assert abs(census.defects[0].z0) > 1
        assert census.defects[0].jump == 1


def test_energy_bounded_in_R(minimizers):
    E = {R: rep.final_energy for R, (_, _, rep) in minimizers.items()}
    assert abs(E[40.0] / E[20.0] - 1) < 0.02
    assert abs(E[20.0] / E[10.0] - 1) < 0.02
    # the defect-free comparison family grows linearly instead
    assert 4 * (40 - 1) > 10 * E[40.0]


def test_hardy_tail_decreases_with_R(minimizers):
    vals = [h.hardy_integral(F, g) for g, F, _ in (minimizers[R] for R in (10.0, 20.0, 40.0))]
    assert all(np.isfinite(vals))
    assert vals[0] > vals[1] > vals[2]


def test_multistart_raises_when_nothing_converges(grid):
    with pytest.raises(DivergenceError):
        h.solve_multistart(grid, StepSchedule(max_iters=0))


def test_multistart_picks_lowest():
    g = ExteriorGrid(10.0, 64, 48)
    res = h.solve_multistart(g)
    assert len(res.branches) == len(h.INITIALISATIONS)
    assert res.best.energy == min(b.energy for b in res.branches if b.report.converged)


# ---------------------------------------------------------------- defect census


def test_no_defects_for_zero_field(grid):
    psi = np.zeros(grid.shape)
    psi[0] = grid.phi
    census = h.detect_defects(PsiField(psi), grid)
    assert len(census) == 0 and not census.unresolved


def test_two_spliced_jumps(grid):
    z_lo, z_hi = 3.0, 6.0
    r = grid.r[:, None]
    psi = np.where((r > z_lo) & (r < z_hi) & (grid.phi[None, :] < 0.3), math.pi, 0.0)
    psi[0] = grid.phi
    census = h.detect_defects(PsiField(psi), grid)
    assert [d.jump for d in census.defects] == [1, -1]
    for d, z in zip(census.defects, (z_lo, z_hi)):
        cell = grid.ds * z * z
        assert abs(d.z0 - z) <= cell


def test_unclassifiable_axis_is_reported(grid):
    psi = np.full(grid.shape, math.pi / 2)
    psi[0] = grid.phi
    census = h.detect_defects(PsiField(psi), grid)
    assert len(census) == 0 and census.unresolved


# ---------------------------------------------------------------- degree


def test_degree_examples(grid):
    assert h.degree(comparison(grid), grid, 1.0) == pytest.approx(-1.0, abs=1e-3)
    assert h.degree(PsiField(np.zeros(grid.shape)), grid, 5.0) == 0.0


def test_degree_jumps_across_defect(minimizers):
    g, F, _ = minimizers[20.0]
    census = h.detect_defects(F, g)
    z0 = abs(census.defects[0].z0)
    with pytest.raises(DomainError):
        h.degree(F, g, z0, census)
    samples = h.degree_samples(F, g, 8, census)
    assert len(samples) == 8
    for r, d in samples:
        assert abs(abs(d) - (1.0 if r < z0 else 0.0)) < 0.05
    inner = [d for r, d in samples if r < z0]
    assert max(inner) - min(inner) < 0.05


# ---------------------------------------------------------------- lift


def test_lift_examples(grid):
    s = P.s_star
    lifted = h.lift_to_qtensor(comparison(grid), P)
    assert np.allclose(lifted.m[0], surface_field(grid, s).m[0], atol=1e-15)
    zero = h.lift_to_qtensor(PsiField(np.zeros(grid.shape)), P)
    assert np.allclose(zero.m, [-s / 3, -s / 3, 0.0])


@given(arrays(float, (6, 9), elements=st.floats(0, math.pi)))
def test_lift_is_uniaxial(psi):
    lifted = h.lift_to_qtensor(PsiField(psi), P)
    assert np.nanmax(biaxiality_array(lifted.matrices())) <= 1e-12
    assert np.allclose(lifted.norm(), P.s_star * math.sqrt(2 / 3))
