import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from isoperimetrix.errors import NotYoung, PredicateFails, SpecError
from isoperimetrix.measures import build
from isoperimetrix.numerics import GridFunction
from isoperimetrix.orlicz import (
    adjoint,
    check_predicates,
    dual_norm_indicator,
    grid_orlicz,
    legendre,
    luxemburg_norm,
    mazya_duality_check,
    orlicz_norm,
    parse_orlicz,
    phi,
    power,
    simple_function_weak_norm,
    truncate_at_zero,
    weak_orlicz_norm,
)

T = np.geomspace(1e-6, 1e6, 61)


def _indicator_of_lower_mass(m, a):
    # 0 below Q(a), then a steep drop: the set {f = 1} has mass a up to the ramp width
    x = float(m.quantile(np.array(a)))
    return GridFunction(np.array([x - 1e-9, x]), np.array([1.0, 0.0]))


def test_indicator_norm_square():
    m = build("gaussian")
    f = _indicator_of_lower_mass(m, 0.25)
    assert orlicz_norm(f, m, power(2)) == pytest.approx(0.5, rel=1e-6)


def test_constant_function_norm():
    m = build("exponential")
    f = GridFunction(np.array([0.0, 1.0]), np.array([3.0, 3.0]))
    assert orlicz_norm(f, m, power(2)) == pytest.approx(3.0, rel=1e-10)
    assert orlicz_norm(f, m, phi(2)) == pytest.approx(3.0 / float(phi(2).inverse(1.0)), rel=1e-10)


def test_identity_on_uniform_l2():
    m = build("uniform:0,1")
    f = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    assert orlicz_norm(f, m, power(2)) == pytest.approx(1 / math.sqrt(3), rel=1e-9)


def test_dual_norm_examples():
    assert dual_norm_indicator(None, 0.25, power(2)) == pytest.approx(0.5)
    assert dual_norm_indicator(None, 1.0, power(3)) == pytest.approx(1.0)
    root = optimize.brentq(lambda t: t * t * math.log1p(t * t) - 2.0, 0.1, 10.0, xtol=1e-15)
    assert dual_norm_indicator(None, 0.5, phi(2)) == pytest.approx(0.5 * root, rel=1e-10)


def test_dual_norm_needs_young():
    with pytest.raises(NotYoung):
        dual_norm_indicator(None, 0.5, power(0.5))


def test_adjoint_of_power():
    np.testing.assert_allclose(adjoint(power(3))(T), T ** (1 / 3), rtol=1e-12)
    np.testing.assert_allclose(power(3).wedge(T), T ** (1 / 3), rtol=1e-12)


@pytest.mark.parametrize("N", [power(1.5), phi(1), phi(2)], ids=lambda n: n.tag)
def test_adjoint_is_involution(N):
    np.testing.assert_allclose(adjoint(adjoint(N))(T), N(T), rtol=1e-9)


def test_weak_norm_of_indicator_and_zero():
    m = build("exponential")
    f = _indicator_of_lower_mass(m, 0.1)
    assert weak_orlicz_norm(f, m, phi(2)) == pytest.approx(float(phi(2).wedge(0.1)), rel=1e-6)
    z = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    assert weak_orlicz_norm(z, m, power(2)) == 0.0


def test_legendre_examples():
    assert legendre(power(2), 2.0) == pytest.approx(1.0, rel=1e-9)
    assert math.isinf(legendre(power(1), 2.0))
    assert legendre(power(1), 0.5) == pytest.approx(0.0, abs=1e-12)


def test_truncation_fixes_power():
    N0 = truncate_at_zero(power(2), 2.0)
    np.testing.assert_allclose(N0(T), T ** 2, rtol=1e-12)


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
def test_truncation_of_phi_is_power_law_above_half(q):
    N = phi(q)
    N0 = truncate_at_zero(N, q)
    t = np.geomspace(0.5, 1e6, 40)
    expected = 2 ** (1 / q) / float(N.inverse(2.0)) * t ** (1 / q)
    np.testing.assert_allclose(N0.wedge(t), expected, rtol=1e-9)
    s = np.geomspace(1e-8, 0.5, 40)
    np.testing.assert_allclose(N0.wedge(s), N.wedge(s), rtol=1e-9)


def test_truncation_rejects_bad_exponent():
    with pytest.raises(PredicateFails):
        truncate_at_zero(power(2), 3.0)


def test_predicates_square():
    r = check_predicates(power(2), q=2, alpha=0.5)
    assert r.is_young.holds and r.ratio_nondecreasing.holds and r.power_nonincreasing.holds


def test_square_power_predicate_fails_at_alpha_one():
    # N(t)/t = t is increasing, so the nonincreasing test must fail
    assert check_predicates(power(2), alpha=1).power_nonincreasing.status == "fails"


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
def test_phi_power_predicate_at_alpha(q):
    assert check_predicates(phi(q), alpha=1 / (2 * q)).power_nonincreasing.holds


def test_sqrt_is_not_young():
    r = check_predicates(power(0.5))
    assert r.is_young.status == "fails"
    assert str(r.is_young).startswith("fails_at(")


def test_parse_orlicz(tmp_path):
    assert parse_orlicz("power:2").tag == "power:2"
    assert parse_orlicz("phi:1.5").tag == "phi:1.5"
    with pytest.raises(SpecError):
        parse_orlicz("cube:3")
    p = tmp_path / "n.csv"
    p.write_text("t,N\n" + "".join(f"{k},{k * k}\n" for k in range(1, 10)))
    N = parse_orlicz(f"grid:{p}")
    assert float(N(2.5)) == pytest.approx(6.5)


def test_grid_orlicz_extends_linearly():
    N = grid_orlicz([1.0, 2.0], [1.0, 3.0])
    assert float(N(3.0)) == pytest.approx(5.0)
    assert float(N.inverse(5.0)) == pytest.approx(3.0)


def test_mazya_check_sandwich_square():
    d = mazya_duality_check(build("gaussian"), 0.25, power(2))
    assert d.lower <= d.formula * (1 + 1e-6) <= d.upper * (1 + 1e-6)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.floats(0.1, 10.0), st.floats(1.0, 4.0))
def test_luxemburg_homogeneous(values, c, p):
    v = np.array(values)
    w = np.full(v.size, 1.0 / v.size)
    N = power(p)
    assert luxemburg_norm(c * v, w, N) == pytest.approx(c * luxemburg_norm(v, w, N), rel=1e-9, abs=1e-300)


@given(st.lists(st.floats(0.0, 10), min_size=1, max_size=12), st.floats(1.0, 4.0))
def test_lp_norm_closed_form(values, p):
    v = np.array(values)
    w = np.full(v.size, 1.0 / v.size)
    ref = float(np.dot(w, v ** p)) ** (1 / p)
    assert luxemburg_norm(v, w, power(p)) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=10), st.sampled_from([power(1), power(2), phi(2)]))
def test_weak_norm_below_strong(values, N):
    v = np.array(values)
    w = np.full(v.size, 1.0 / v.size)
    assert simple_function_weak_norm(v, w, N) <= luxemburg_norm(v, w, N) * (1 + 1e-9)
