import numpy as np
import pytest
import scipy.sparse as sp

from nematic.errors import DivergenceError
from nematic.solver import MODES, Problem, StepSchedule, relax_problem


class Quadratic(Problem):
    """``E = x.A x / 2 - b.x`` with a diagonal positive ``A``."""

    def __init__(self, diag, b, flip=False):
        self.A = sp.diags(diag).tocsr()
        self.b = np.asarray(b, float)
        self.mass = np.ones(len(diag))
        self.flip = flip

    def energy(self, x):
        return 0.5 * float(x @ (self.A @ x)) - float(self.b @ x)

    def energy_change(self, x, x_new):
        # cancellation-free, as the interface requires
        d = x_new - x
        return float((self.A @ x - self.b) @ d) + 0.5 * float(d @ (self.A @ d))

    def gradient(self, x):
        g = self.A @ x - self.b
        return -g if self.flip else g

    def operator(self, x, mode):
        if mode == "explicit":
            return None
        if mode == "semi-implicit":
            return sp.diags(np.full(self.A.shape[0], 0.0))
        return self.A

    def residual(self, x):
        return float(np.max(np.abs(self.A @ x - self.b)))


@pytest.mark.parametrize("mode", MODES)
def test_modes_converge_monotonically(mode):
    prob = Quadratic([1.0, 2.0, 5.0], [1.0, -1.0, 2.0])
    x, rep = relax_problem(prob, np.zeros(3), StepSchedule(tol=1e-10, max_iters=5000, mode=mode))
    assert rep.converged and rep.residual <= 1e-10
    assert np.allclose(x, [1.0, -0.5, 0.4], atol=1e-9)
    assert np.all(np.diff(rep.energies) <= 0.0)
    assert rep.final_energy == pytest.approx(prob.energy(x))


def test_already_converged_start():
    prob = Quadratic([1.0, 1.0], [0.0, 0.0])
    x, rep = relax_problem(prob, np.zeros(2), StepSchedule())
    assert rep.converged and rep.iterations == 0 and rep.energies == [0.0]


def test_line_search_failure_is_divergence():
    prob = Quadratic([1.0, 2.0], [1.0, 1.0], flip=True)
    with pytest.raises(DivergenceError):
        relax_problem(prob, np.zeros(2), StepSchedule(max_rejections=5))


def test_iteration_cap_reports_nonconvergence():
    prob = Quadratic([1.0, 1e3], [1.0, 1.0])
    _, rep = relax_problem(prob, np.zeros(2), StepSchedule(max_iters=1, mode="explicit"))
    assert not rep.converged and rep.iterations == 1
    assert set(rep.payload()) == {"iterations", "final_energy", "residual", "sup_norm", "converged", "energies", "message"}


@pytest.mark.parametrize("kwargs", [{"mode": "leapfrog"}, {"tol": 0.0}, {"max_iters": -1}])
def test_schedule_validation(kwargs):
    with pytest.raises(ValueError):
        StepSchedule(**kwargs)
