import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoperimetrix.errors import BadGrid
from isoperimetrix.numerics import (
    CumulativeIntegral,
    GridFunction,
    QuadratureConfig,
    essential_constant,
    integrate,
    inf_scan,
    invert_monotone,
    log_grid,
)
from isoperimetrix.orlicz import phi
from isoperimetrix.profiles import profile_of
from isoperimetrix.measures import build
from scipy import optimize, stats


def test_integrate_constant():
    assert integrate(lambda s: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_semi_infinite_exponential():
    assert integrate(lambda s: math.exp(-s), 0.0, math.inf) == pytest.approx(1.0, abs=1e-10)


def test_integrate_endpoint_singularity():
    assert integrate(lambda s: s ** -0.5, 0.0, 1.0) == pytest.approx(2.0, abs=1e-8)


def test_invert_square():
    assert invert_monotone(lambda t: t * t, 4.0, (0.0, 10.0)) == pytest.approx(2.0, abs=1e-10)


def test_invert_normal_cdf_at_half():
    assert invert_monotone(stats.norm.cdf, 0.5, (-5.0, 5.0)) == pytest.approx(0.0, abs=1e-10)


def test_invert_phi2_matches_bisection():
    f = lambda t: t * t * math.log1p(t * t)
    ref = optimize.bisect(lambda t: f(t) - 2.0, 0.0, 10.0, xtol=1e-15)
    assert invert_monotone(f, 2.0, (0.0, 10.0)) == pytest.approx(ref, abs=1e-10)
    assert float(phi(2).inverse(2.0)) == pytest.approx(ref, rel=1e-10)


def test_inf_scan_linear():
    x, v = inf_scan(lambda t: t, (1.0, 2.0))
    assert x == pytest.approx(1.0) and v == pytest.approx(1.0)


def test_inf_scan_parabola():
    x, v = inf_scan(lambda t: (t - 0.3) ** 2, (0.0, 1.0))
    assert x == pytest.approx(0.3, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-6)


def test_inf_scan_exponential_cheeger_ratio():
    p = profile_of(build("exponential"))
    _, v = inf_scan(lambda t: p.tilde(t) / t, (0.0, 0.5), vectorized=True)
    assert v == pytest.approx(1.0, abs=1e-9)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=4)


def test_grid_function_rejects_unsorted_knots():
    with pytest.raises(BadGrid):
        GridFunction(np.array([0.0, 0.0, 1.0]), np.array([1.0, 2.0, 3.0]))


def test_grid_function_linear_tail():
    f = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 2.0]), "linear-tail")
    assert float(f(3.0)) == pytest.approx(6.0)
    assert math.isinf(f.sup_abs())
    g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
    assert float(g(3.0)) == pytest.approx(2.0)
    assert g.sup_abs() == 2.0


def test_cumulative_integral_power():
    nodes = log_grid(1e-6, 1.0, 16)
    tab = CumulativeIntegral(lambda s: s ** -2.0, nodes, tail=1.0)
    s = np.array([1e-6, 3e-4, 0.1, 0.7])
    np.testing.assert_allclose(tab(s), 1.0 / s, rtol=1e-10)


def test_essential_constant_directions():
    assert essential_constant(np.array([1.0, 2.0, 3.0]), "nondecreasing") == 1.0
    assert essential_constant(np.array([1.0, 3.0, 2.0]), "nondecreasing") == pytest.approx(1.5)
    assert essential_constant(np.array([3.0, 2.0, 1.0]), "nonincreasing") == 1.0


@given(st.lists(st.floats(0.01, 100.0), min_size=2, max_size=40))
def test_essential_constant_at_least_one(values):
    h = np.array(values)
    assert essential_constant(h, "nondecreasing") >= 1.0
    assert essential_constant(h, "nonincreasing") >= 1.0


@given(st.floats(0.1, 5.0), st.floats(0.1, 3.0))
def test_integrate_power_closed_form(b, p):
    assert integrate(lambda s: s ** p, 0.0, b) == pytest.approx(b ** (p + 1) / (p + 1), rel=1e-9)
