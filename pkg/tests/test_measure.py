import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra_lab.errors import ConfigurationError, DomainError, EvaluationError
from volterra_lab.measure import (Density, Grid, Measure, Trajectory, constant_density, convolve_grid,
                                  convolve_measure, exp_decay, polynomial_density, total_variation)


def test_grid_nodes():
    g = Grid(0.1, 2.0)
    assert g.n_points == 21
    assert g.t_last == pytest.approx(2.0)
    assert g.index_of(0.3) == 3
    with pytest.raises(DomainError):
        g.index_of(0.35)
    assert g.refined().n_points == 41


@pytest.mark.parametrize("h, T", [(0.0, 1.0), (-1e-3, 1.0), (1.0, 0.5), (np.inf, 2.0)])
def test_bad_grids(h, T):
    with pytest.raises(ConfigurationError):
        Grid(h, T)


def test_trajectory_interpolation_and_domain():
    g = Grid(0.5, 2.0)
    x = Trajectory.from_function(lambda t: t ** 2, g)
    assert x(0.25) == pytest.approx(0.125)
    assert x(-1.0) == 0.0
    with pytest.raises(DomainError):
        x(3.0)
    with pytest.raises(ValueError):
        x.values[0] = 1.0
    with pytest.raises(ConfigurationError):
        Trajectory(g, np.zeros(3))


def test_trajectory_restriction():
    fine = Trajectory.from_function(np.sin, Grid(0.01, 1.0))
    coarse = fine.on(Grid(0.02, 1.0))
    assert np.array_equal(coarse.values, np.sin(Grid(0.02, 1.0).times))


def test_measure_validation():
    with pytest.raises(ConfigurationError):
        Measure(((-0.1, 1.0),))
    with pytest.raises(ConfigurationError):
        Measure(((0.5, 1.0), (0.5, 2.0)))
    with pytest.raises(ConfigurationError):
        Density(np.exp, np.inf)
    m = Measure(((0.5, -1.0), (0.0, 2.0)))
    assert m.atoms == ((0.0, 2.0), (0.5, -1.0))
    assert m.mass_at_zero == 2.0


def test_total_variation():
    assert total_variation(Measure(((0.0, -1.0), (0.3, 0.5)))) == pytest.approx(1.5)
    tv = total_variation(Measure((), exp_decay(1.0, 40.0, -1.0)))
    assert tv == pytest.approx(1.0, abs=1e-5)


def test_density_evaluation_error():
    bad = Density(lambda s: 1.0 / s, 1.0, "pole")
    with pytest.raises(EvaluationError):
        convolve_measure(Measure((), bad), Trajectory.from_function(np.ones_like, Grid(0.1, 1.0)), 0.5)


def test_delta0_convolution_is_point_evaluation():
    x = Trajectory.from_function(np.cos, Grid(1e-2, 2.0))
    m = Measure(((0.0, -1.0),))
    assert convolve_measure(m, x, 1.3) == pytest.approx(-np.cos(1.3))


def test_delayed_atom_one_sided():
    x = Trajectory.from_function(lambda t: 1.0 + t, Grid(0.1, 2.0))
    m = Measure(((0.5, 2.0),))
    assert convolve_measure(m, x, 0.5, side="right") == pytest.approx(2.0)
    assert convolve_measure(m, x, 0.5, side="left") == 0.0
    right, left = convolve_grid(m, x.values, 0.1)
    assert right[5] == pytest.approx(2.0) and left[5] == 0.0


def test_density_convolution_against_closed_form():
    # int_0^t e^{-s} ds for x = 1
    g = Grid(1e-3, 3.0)
    x = Trajectory.from_function(np.ones_like, g)
    val = convolve_measure(Measure((), exp_decay(1.0, 40.0)), x, 2.0)
    assert val == pytest.approx(1 - np.exp(-2.0), abs=1e-6)


def test_partial_support_panel():
    # s_max off the grid: int_0^0.25 c ds with h = 0.1
    x = Trajectory.from_function(np.ones_like, Grid(0.1, 1.0))
    m = Measure((), constant_density(2.0, 0.25))
    assert convolve_measure(m, x, 0.8) == pytest.approx(0.5)
    right, _ = convolve_grid(m, x.values, 0.1)
    assert right[8] == pytest.approx(0.5)


measures = st.builds(
    lambda atoms, c, smax: Measure(tuple(atoms), polynomial_density((c, -0.3 * c), smax) if smax else None),
    st.lists(st.tuples(st.sampled_from([0.0, 0.1, 0.25, 0.33, 0.7]), st.floats(-2, 2)),
             max_size=3, unique_by=lambda a: a[0]),
    st.floats(-1, 1), st.sampled_from([None, 0.4, 0.55, 2.0]))


@settings(max_examples=40, deadline=None)
@given(measures)
def test_grid_convolution_matches_pointwise(m):
    g = Grid(0.05, 1.5)
    x = Trajectory.from_function(lambda t: np.cos(3 * t) + t, g)
    right, left = convolve_grid(m, x.values, g.h)
    for i in (0, 1, 5, 14, 20, 30):
        assert right[i] == pytest.approx(convolve_measure(m, x, g.times[i]), abs=1e-12)
        assert left[i] == pytest.approx(convolve_measure(m, x, g.times[i], side="left"), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(measures, st.floats(-3, 3), st.floats(-3, 3))
def test_convolution_is_linear(m, a, b):
    g = Grid(0.05, 1.0)
    x = Trajectory.from_function(np.sin, g)
    y = Trajectory.from_function(np.exp, g)
    lhs = convolve_grid(m, (a * x + b * y).values, g.h)[0]
    rhs = a * convolve_grid(m, x.values, g.h)[0] + b * convolve_grid(m, y.values, g.h)[0]
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(measures)
def test_convolution_bounded_by_total_variation(m):
    g = Grid(0.05, 1.5)
    x = Trajectory.from_function(lambda t: np.sin(5 * t), g)
    right, _ = convolve_grid(m, x.values, g.h)
    assert np.max(np.abs(right)) <= total_variation(m) * np.max(np.abs(x.values)) + 1e-9
