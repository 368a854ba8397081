import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra_lab.errors import ConfigurationError, DomainError
from volterra_lab.forcing import (Constant, LpMember, OscGrowth, Sine, StepTrain, Tabulated, decompose,
                                  from_config, interval_average, window_integral)
from volterra_lab.measure import Grid, Trajectory

STEPS = StepTrain(tuple(0.5 ** k for k in range(6)), (0.5,) * 6)
REGISTERED = [Constant(1.5), OscGrowth(1.0, 2.0), LpMember("exp", 2.0, 0.7),
              LpMember("reciprocal", power=1.5), Sine(1.0, 1.0), STEPS]


def test_eval_examples():
    assert OscGrowth(1.0, 2.0)(0.0) == pytest.approx(0.8414709848)
    assert Constant(0.0)(17.3) == 0.0
    for f in REGISTERED:
        assert f(-0.5) == 0.0


def test_osc_growth_parameters():
    with pytest.raises(ConfigurationError):
        OscGrowth(2.0, 1.0)
    with pytest.raises(ConfigurationError):
        OscGrowth(0.0, 1.0)


def test_tabulated_horizon():
    f = Tabulated(Trajectory.from_function(np.sin, Grid(0.1, 1.0)))
    assert f(0.05) == pytest.approx(0.5 * np.sin(0.1))
    with pytest.raises(DomainError):
        f(1.5)
    assert not f.has_antiderivative


def test_step_train_one_sided_values():
    assert STEPS(1.0) == 0.5 and STEPS.left_limit(1.0) == 0.0
    assert STEPS(0.5) == 0.0 and STEPS.left_limit(0.5) == 1.0
    assert STEPS.left_limit(0.0) == 0.0


@pytest.mark.parametrize("cfg", [f.config() for f in REGISTERED]
                         + [{"kind": "sum", "terms": [{"kind": "constant", "c": 1.0},
                                                      {"kind": "sine", "amplitude": 2.0, "frequency": 0.5}]},
                            {"kind": "scaled", "c": -2.0, "inner": {"kind": "constant", "c": 1.0}}])
def test_config_round_trip(cfg):
    f = from_config(cfg)
    assert f.config() == cfg
    t = np.linspace(0, 3, 17)
    assert np.array_equal(from_config(f.config())(t), f(t))


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        from_config({"kind": "mystery"})


@pytest.mark.parametrize("alpha, beta", [(1.0, 2.0), (1.0, 3.0), (0.5, 2.0)])
def test_osc_antiderivative_against_mpmath(alpha, beta):
    # int_0^t f = (1/beta) int_1^U u^(a-1) sin u du, and
    # int_X^inf u^(a-1) e^{iu} du = e^{i pi a/2} Gamma(a, -iX)
    a = mpmath.mpf(alpha) / beta
    tail = lambda X: mpmath.im(mpmath.exp(0.5j * mpmath.pi * a) * mpmath.gammainc(a, -1j * X))
    f = OscGrowth(alpha, beta)
    for t in (0.1, 0.7, 1.5, 1.9, 2.4, 3.3, 5.0, 7.5):
        U = mpmath.exp(beta * mpmath.mpf(t))
        exact = float((tail(1) - tail(U)) / beta)
        # the argument e^{beta t} carries a relative rounding error of eps * beta * t
        assert f.antiderivative(t) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("f", REGISTERED[:5] + [STEPS], ids=lambda f: f.kind)
def test_closed_form_matches_quadrature(f):
    lo = np.array([0.0, 0.3, 1.1, 2.0])
    hi = lo + 0.7
    exact = window_integral(f, lo, hi, 1e-4, "exact")
    quad = window_integral(f, lo, hi, 1e-4, "quadrature")
    assert np.allclose(exact, quad, atol=1e-6)


def test_exact_without_antiderivative():
    f = Tabulated(Trajectory.from_function(np.sin, Grid(0.1, 3.0)))
    with pytest.raises(ConfigurationError):
        window_integral(f, [0.0], [1.0], 0.1, "exact")


def test_interval_average_constant():
    F = interval_average(Constant(2.5), 0.3, Grid(1e-2, 3.0))
    assert np.allclose(F.values, 0.75, atol=1e-14)


@pytest.mark.parametrize("method", ["exact", "quadrature"])
def test_interval_average_full_period_sine(method):
    F = interval_average(Sine(), 1.0, Grid(1e-3, 5.0), method)
    assert np.max(np.abs(F.values)) < 1e-6


@pytest.mark.parametrize("theta", [0.0, -0.1, 1.5])
def test_interval_average_theta_domain(theta):
    with pytest.raises(DomainError):
        interval_average(Constant(1.0), theta, Grid(0.1, 2.0))


def test_interval_average_zero_extension_at_origin():
    f = LpMember("exp")
    F = interval_average(f, 0.5, Grid(0.01, 2.0))
    assert F.values[0] == pytest.approx(1 - np.exp(-0.5))


@pytest.mark.parametrize("theta", [1e-3, 0.013, 0.25])
def test_interval_average_off_grid_quadrature(theta):
    f = Sine(1.0, 0.7)
    g = Grid(0.01, 2.0)
    F = interval_average(f, theta, g, "quadrature")
    exact = interval_average(f, theta, g, "exact")
    sub = min(g.h, theta / 8)
    sub = g.h / np.ceil(g.h / sub - 1e-9)
    w = 2 * np.pi * 0.7
    # composite trapezoid error bound theta * sub^2 * max|f''| / 12
    assert F.sup_distance(exact) <= theta * sub ** 2 * w ** 2 / 12 * 1.01


def test_osc_interval_average_decay_rate():
    f = OscGrowth(1.0, 2.0)
    g = Grid(1e-3, 10.0)
    F = interval_average(f, 0.5, g)
    t = g.times
    edges = np.linspace(2.0, 10.0, 17)
    centres = 0.5 * (edges[1:] + edges[:-1])
    peaks = [np.max(np.abs(F.values[(t >= a) & (t <= b)])) for a, b in zip(edges[:-1], edges[1:])]
    slope = np.polyfit(centres, np.log(peaks), 1)[0]
    assert abs(slope + 1.0) < 0.1


def test_decompose_constant():
    c = 2.0
    g = Grid(1e-3, 6.0)
    d = decompose(Constant(c), g)
    t = g.times
    assert np.allclose(d.f1.values, c * np.minimum(t, 1), atol=1e-12)
    assert np.allclose(d.f2.values[t >= 1], 0.0, atol=1e-12)
    assert d.f3.values[-1] == pytest.approx(c / 2)
    assert d.key1_residual < 1e-12


def test_decompose_zero():
    d = decompose(Constant(0.0), Grid(1e-2, 3.0))
    for part in (d.f1, d.f2, d.f3):
        assert not np.any(part.values)
    assert d.key1_residual == 0.0


def test_decompose_needs_horizon():
    with pytest.raises(ConfigurationError):
        decompose(Constant(1.0), Grid(0.1, 1.5))


@pytest.mark.parametrize("f", [OscGrowth(1.0, 3.0), Sine(1.0, 1.0), LpMember("reciprocal"), LpMember("exp")],
                         ids=["osc13", "sine", "reciprocal", "exp"])
def test_key1_second_order(f):
    # h = 2^-12 keeps exp(beta T) h below 0.1 for osc_growth(1, 3) on [0, 2]
    res = [decompose(f, Grid(2.0 ** -k, 2.0)).key1_residual for k in (12, 13, 14)]
    for coarse, fine in zip(res, res[1:]):
        assert 3.4 <= coarse / fine <= 4.6


def test_key1_residual_threshold_osc():
    # threshold from a reference at h/10: the residual is a pure O(h^2) error term
    f = OscGrowth(1.0, 3.0)
    h = 2.0 ** -12
    coarse = decompose(f, Grid(h, 2.0)).key1_residual
    ref = decompose(f, Grid(h / 10, 2.0)).key1_residual
    assert coarse == pytest.approx(100 * ref, rel=0.05)


def test_f1_continuity():
    f = OscGrowth(1.0, 2.0)
    g = Grid(1e-4, 3.0)
    d = decompose(f, g)
    inc = np.abs(np.diff(d.f1.values))
    # both window ends move by h, so 2 h sup|f| on [t_i - 1, t_{i+1}] bounds the increment
    bound = 2 * np.exp(g.times[1:]) * g.h
    assert np.all(inc <= bound * (1 + 1e-9) + 1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(REGISTERED), st.sampled_from(REGISTERED))
def test_decompose_linear(a, b, f, g_):
    grid = Grid(1e-2, 3.0)
    combo = decompose(a * f + b * g_, grid)
    df, dg = decompose(f, grid), decompose(g_, grid)
    for name in ("f1", "f2", "f3"):
        lhs = getattr(combo, name).values
        rhs = a * getattr(df, name).values + b * getattr(dg, name).values
        assert np.allclose(lhs, rhs, atol=1e-11 * (1 + np.max(np.abs(rhs))))
