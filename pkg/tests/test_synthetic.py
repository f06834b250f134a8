import numpy as np
import pytest

from tvbo.domain import Domain
from tvbo.kernels import SquaredExponentialKernel
from tvbo.synthetic import (
    EpsilonSchedule,
    MarkovChainObjective,
    ReplayObjective,
    SuddenChangeObjective,
    observe,
    seed_streams,
    true_optimum,
)

GRID = np.linspace(0, 1, 8)[:, None]
KERNEL = SquaredExponentialKernel((0.3,))


def test_zero_rate_is_static():
    obj = MarkovChainObjective(KERNEL, GRID, 0.0, 1)
    f1 = obj.values.copy()
    for t in range(2, 10):
        obj.advance(t)
    np.testing.assert_array_equal(obj.values, f1)


def test_full_rate_redraws():
    obj = MarkovChainObjective(KERNEL, GRID, 1.0, 1)
    f1 = obj.values.copy()
    assert not np.allclose(obj.advance(2).values, f1)


def test_recursion_matches_definition():
    # replay the generator's own draws: f_t = sqrt(1-eps) f_{t-1} + sqrt(eps) g_t
    eps = 0.2
    obj = MarkovChainObjective(KERNEL, GRID, eps, 3)
    ref = MarkovChainObjective(KERNEL, GRID, 1.0, 3)  # same stream, pure draws g_t
    f = ref.values.copy()
    np.testing.assert_array_equal(obj.values, f)
    for t in range(2, 40):
        g = ref.advance(t).values
        f = np.sqrt(1 - eps) * f + np.sqrt(eps) * g
        np.testing.assert_allclose(obj.advance(t).values, f, atol=1e-12)


def test_sequential_steps_only():
    obj = MarkovChainObjective(KERNEL, GRID, 0.1, 0)
    with pytest.raises(ValueError):
        obj.advance(3)


@pytest.mark.parametrize("eps", [0.03, 0.1])
def test_lag_one_correlation_and_marginal(eps):
    grid = np.linspace(0, 1, 5)[:, None]
    a, b = [], []
    for s in range(2000):
        obj = MarkovChainObjective(KERNEL, grid, eps, s)
        for t in range(2, 6):
            obj.advance(t)
        a.append(obj.values[2])
        b.append(obj.advance(6).values[2])
    a, b = np.array(a), np.array(b)
    assert np.corrcoef(a, b)[0, 1] == pytest.approx(np.sqrt(1 - eps), abs=0.03)
    assert 0.85 <= b.var() <= 1.15


def test_epsilon_schedule():
    s = EpsilonSchedule([(1, 0.0), (10, 0.5)])
    assert s(1) == 0.0 and s(9) == 0.0 and s(10) == 0.5 and s(400) == 0.5
    assert EpsilonSchedule(0.03)(77) == 0.03
    with pytest.raises(ValueError):
        EpsilonSchedule([(2, 0.1)])
    with pytest.raises(ValueError):
        EpsilonSchedule(1.5)


def test_sudden_change():
    obj = SuddenChangeObjective(KERNEL, GRID, 4, 0)
    np.testing.assert_array_equal(obj.values, obj.f_A)
    for t in range(2, 4):
        np.testing.assert_array_equal(obj.advance(t).values, obj.f_A)
    np.testing.assert_array_equal(obj.advance(4).values, obj.f_B)
    assert not np.allclose(obj.f_A, obj.f_B)


def test_replay():
    M = np.arange(12.0).reshape(4, 3)
    obj = ReplayObjective(M)
    assert true_optimum(obj) == (2, 2.0)
    obj.advance(2)
    assert observe(obj, 1, 0.0, None) == 4.0
    obj.advance(3), obj.advance(4)
    with pytest.raises(IndexError):
        obj.advance(5)


def test_observe_noise_and_points():
    obj = MarkovChainObjective(KERNEL, GRID, 0.0, 0)
    assert observe(obj, GRID[3] + 0.01, 0.0, None) == obj.values[3]
    rng = np.random.default_rng(0)
    ys = np.array([observe(obj, 3, 0.02, rng) for _ in range(20000)])
    assert ys.mean() == pytest.approx(obj.values[3], abs=0.01)
    assert ys.var() == pytest.approx(0.02, rel=0.05)


def test_true_optimum_ties_and_step_check():
    obj = ReplayObjective([[1.0, 3.0, 3.0]])
    assert true_optimum(obj, 1) == (1, 3.0)
    with pytest.raises(ValueError):
        true_optimum(obj, 2)


def test_seed_streams_independent_and_reproducible():
    a1, n1 = seed_streams(5)
    a2, n2 = seed_streams(5)
    assert a1.standard_normal() == a2.standard_normal()
    assert n1.standard_normal() == n2.standard_normal()
    a, n = seed_streams(5)
    assert a.standard_normal() != n.standard_normal()


class TestDomain:
    def test_grid_order_last_axis_fastest(self):
        d = Domain.grid([(0, 1), (0, 2)], (2, 3))
        np.testing.assert_array_equal(d.candidates, [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]])
        assert len(d) == 6 and d.dim == 2

    def test_arms(self):
        d = Domain.arms(4)
        assert d.candidates.shape == (4, 1) and d.nearest_index([2.2]) == 2

    @pytest.mark.parametrize("bad", [dict(bounds=[(1, 0)], resolution=3), dict(bounds=[(0, 1)], resolution=0)])
    def test_rejects_bad_grid(self, bad):
        with pytest.raises(ValueError):
            Domain.grid(**bad)
