import math

import numpy as np
import pytest

from isoperimetrix import tensorize as TZ
from isoperimetrix.errors import InfiniteControlRate, NotConcave
from isoperimetrix.measures import build
from isoperimetrix.numerics import GridFunction, invert_increasing
from isoperimetrix.orlicz import check_predicates, from_wedge
from isoperimetrix.profiles import (
    Profile,
    comparator_I0,
    exponential_profile,
    gaussian_profile,
    measure_from_profile,
    profile_of,
)


@pytest.fixture(scope="module")
def gauss():
    return TZ.build_machinery(gaussian_profile())


@pytest.fixture(scope="module")
def expo():
    return TZ.build_machinery(exponential_profile())


def test_control_rate_of_comparator_is_one():
    assert TZ.control_rate(comparator_I0()) == pytest.approx(1.0, abs=1e-12)


def test_control_rate_exponential_finite():
    D = TZ.control_rate(exponential_profile())
    assert 1.0 <= D < math.inf


def _spike():
    def J(t):
        m = np.minimum(np.asarray(t, dtype=float), 1 - np.asarray(t, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(m > 0, m * np.log(1 / np.maximum(m, 1e-300)) ** 8, 0.0)
    return Profile(J, "spike")


def test_control_rate_log_spike_is_infinite():
    assert math.isinf(TZ.control_rate(_spike()))


def test_build_rejects_nonconcave():
    with pytest.raises(NotConcave):
        TZ.build_machinery(Profile(lambda t: np.minimum(t, 1 - np.asarray(t)) ** 2, "convex"))


def test_build_rejects_infinite_rate():
    with pytest.raises((InfiniteControlRate, NotConcave)):
        TZ.build_machinery(_spike())


@pytest.mark.parametrize("name", ["gauss", "expo"])
def test_envelopes_and_facts(name, request):
    mach = request.getfixturevalue(name)
    assert TZ.envelope_violations(mach) == {"lower": 0, "upper": 0}
    assert all(c.passes for c in mach.facts)
    lower, upper = TZ.last_thing_check(mach)
    assert lower >= 1 - 1e-6 and math.isfinite(upper)


def test_envelopes_for_exp_alpha_profile():
    mach = TZ.build_machinery(profile_of(build("exp_alpha:1.5")))
    assert TZ.envelope_violations(mach) == {"lower": 0, "upper": 0}


def test_g_is_nondecreasing_and_sandwiched(gauss):
    t = np.geomspace(1e-12, 0.5, 1024)
    g = gauss.g(t)
    r = gauss.J.tilde(t) / (t * np.sqrt(np.log1p(1 / t)))
    assert np.all(np.diff(g) >= -1e-12 * g[1:])
    assert np.all(g <= r * (1 + 1e-12)) and np.all(r <= gauss.D * g * (1 + 1e-9))


def test_wedge_comparable_to_j1_over_sqrt(gauss):
    lower, upper = TZ.last_thing_check(gauss)
    t = np.geomspace(1e-12, 1.0, 300)
    r = gauss.N_wedge(t) * np.sqrt(t) / gauss.J1(t)
    assert np.all(r <= 1 + 1e-9) and np.all(r >= 1 / upper * (1 - 1e-9))


def test_scaling_profile(gauss):
    J = gaussian_profile()
    scaled = TZ.build_machinery(J.scaled(3.0))
    t = np.geomspace(1e-10, 0.5, 50)
    assert scaled.D == pytest.approx(gauss.D, rel=1e-12)
    np.testing.assert_allclose(scaled.N_wedge(t), 3.0 * gauss.N_wedge(t), rtol=1e-10)
    assert TZ.last_thing_check(scaled) == pytest.approx(TZ.last_thing_check(gauss), rel=1e-9)


def test_wedge_of_machinery_gives_young_function(gauss):
    lo, hi = 1e-13, 1e3
    inv = lambda y: invert_increasing(gauss.N_wedge, y, lo=1e-300, hi=1e300, iterations=120)
    N = from_wedge(gauss.N_wedge, inv, "machinery")
    t = np.geomspace(1.0 / gauss.N_wedge(np.array(hi)), 1.0 / gauss.N_wedge(np.array(lo)), 400)
    rep = check_predicates(N, q=2.0, grid=t)
    assert rep.is_young.holds and rep.ratio_nondecreasing.holds


def test_bobkov_round_trip_machinery(gauss):
    again = TZ.build_machinery(profile_of(measure_from_profile(gaussian_profile())))
    t = np.geomspace(1e-4, 0.5, 100)
    np.testing.assert_allclose(again.N_wedge(t), gauss.N_wedge(t), rtol=1e-3)


def test_t_weight_nondecreasing(expo):
    x = np.geomspace(math.log(3.0), expo.x_max, 500)
    T = expo.T(x)
    assert np.all(np.diff(T) >= -1e-9 * T[1:])


def test_beckner_constant_function_vanishes(gauss):
    m = build("gaussian")
    f = GridFunction(np.array([-1.0, 1.0]), np.array([2.0, 2.0]))
    assert TZ.beckner_functional(f, m, gauss.T) == pytest.approx(0.0, abs=1e-7)


def test_beckner_indicator_gap():
    m = build("exponential")
    a = 0.2
    x = float(m.quantile(np.array(a)))
    f = GridFunction(np.array([x - 1e-9, x]), np.array([1.0, 0.0]))
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    xs = np.geomspace(1.0 + 1e-3, 27.6, 64)
    expected = max(math.sqrt(max(a - a ** (2.0 / (2.0 - 1.0 / s)), 0.0)) for s in xs)
    assert TZ.beckner_functional(f, m, one) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("J,spec", [(gaussian_profile(), "gaussian"), (exponential_profile(), "exponential")])
def test_beckner_bracket_one_sided(J, spec):
    from isoperimetrix.capacity import capacity_bound_of
    mach = TZ.build_machinery(J)
    m = build(spec)
    t = np.geomspace(1e-8, 0.49, 200)
    d2 = float(np.min(capacity_bound_of(m, 2.0)(t) / mach.N_wedge(t)))
    assert d2 <= math.sqrt(20) * TZ.beckner_d1_upper(mach, m)["upper"]


def test_halfspace_examples():
    e = build("exponential")
    assert TZ.coordinate_halfspace_upper(e, 5, 0.5) == pytest.approx(0.5)
    g = build("gaussian")
    for k in (1, 3, 10):
        assert TZ.coordinate_halfspace_upper(g, k, 0.1) == pytest.approx(float(gaussian_profile()(0.1)), rel=1e-9)
    assert TZ.coordinate_halfspace_upper(e, 1, 0.3) == pytest.approx(float(profile_of(e)(0.3)))
    with pytest.raises(ValueError):
        TZ.coordinate_halfspace_upper(e, 0, 0.3)


def test_as_dict_bundle(expo):
    d = expo.as_dict(n=16)
    assert len(d["t"]) == len(d["N_wedge"]) == 16
    assert len(d["certificates"]) == 8
