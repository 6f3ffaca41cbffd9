import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoperimetrix.capacity import (
    CapacityBound,
    cap1_profile_bridge,
    cap_oracle,
    cap_oracle_detail,
    capacity_bound_of,
    capq,
    conjugate,
    delta_constant,
    gamma_constant,
    interval_capacity,
    lift,
    singularity_smooth,
)
from isoperimetrix.errors import DegenerateExponents, QOutOfRange
from isoperimetrix.measures import build
from isoperimetrix.orlicz import phi, power
from isoperimetrix.profiles import gaussian_profile, profile_of

EXP = build("exponential")


def test_conjugate():
    assert conjugate(2.0) == 2.0
    assert math.isinf(conjugate(1.0))
    with pytest.raises(QOutOfRange):
        conjugate(0.5)


def test_interval_capacity_exponential():
    assert interval_capacity(EXP, -math.log(2.0), 0.0, 2.0) == pytest.approx(1 / math.sqrt(2), rel=1e-9)


def test_interval_capacity_uniform():
    assert interval_capacity(build("uniform:0,1"), 0.25, 0.5, 2.0) == pytest.approx(2.0, rel=1e-9)


@pytest.mark.parametrize("spec", ["gaussian", "exponential", "exp_alpha:1.5"])
def test_interval_capacity_decreases_with_width(spec):
    m = build(spec)
    vals = [interval_capacity(m, -w, 0.0, 2.0) for w in (0.2, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_interval_capacity_divergent_flag():
    # ρ^{−1/(q−1)} = c|x|^{−2} near the cusp zero when q = 1.25, which is not integrable
    val, flag = interval_capacity(build("cusp:0.5"), -0.5, 0.5, 1.25, with_flag=True)
    assert flag == "divergent" and val == 0.0


@pytest.mark.parametrize("t", [1e-4, 0.01, 0.2, 0.5])
def test_cap1_exponential_is_t(t):
    assert capq(EXP, 1.0, t) == pytest.approx(t, rel=1e-9)


def test_cap2_exponential_quarter():
    assert capq(EXP, 2.0, 0.25) == pytest.approx(1 / math.sqrt(2), rel=1e-6)


def test_cap2_exponential_over_sqrt_t():
    t = np.geomspace(1e-4, 0.45, 40)
    ratio = np.array([capq(EXP, 2.0, s) for s in t]) / np.sqrt(t)
    assert ratio.min() >= 0.9


def test_cap2_gaussian_envelope_ratio_bounded():
    m = build("gaussian")
    t = np.geomspace(1e-6, 0.4, 20)
    env = np.sqrt(t * np.log(1 / t))
    r = np.array([capq(m, 2.0, s) for s in t]) / env
    assert 0 < r.min() <= r.max() < 10


def test_cap1_bridge_exponential_and_zero():
    b = cap1_profile_bridge(profile_of(EXP))
    t = np.geomspace(1e-6, 0.5, 20)
    np.testing.assert_allclose(b(t), t, rtol=1e-12)
    z = cap1_profile_bridge(lambda s: 0 * np.asarray(s))
    assert np.all(z(t) == 0)


def test_cap1_bridge_gaussian():
    b = cap1_profile_bridge(profile_of(build("gaussian")))
    t = np.geomspace(1e-6, 0.5, 20)
    np.testing.assert_allclose(b(t), gaussian_profile().tilde(t), rtol=1e-9)


def test_lift_constant_from_q_one():
    c = 0.7
    b = CapacityBound(1.0, lambda s: c + 0 * np.asarray(s), "lower-bound", "const")
    a = np.array([1e-6, 0.1, 0.3, 0.45])
    np.testing.assert_allclose(lift(b, 2.0)(a), c * (0.5 - a) ** -0.5, rtol=1e-9)


def test_gamma_at_infinite_p0():
    assert gamma_constant(2.0, math.inf) == 1.0
    with pytest.raises(DegenerateExponents):
        gamma_constant(3.0, 2.0)


def test_lift_identity_and_monotone():
    base = capacity_bound_of(build("gaussian"), 1.0)
    assert lift(base, 1.0) is base
    small = CapacityBound(1.0, lambda s: 0.5 * base(s), "lower-bound", "half")
    a = np.geomspace(1e-5, 0.45, 15)
    assert np.all(lift(small, 2.0)(a) <= lift(base, 2.0)(a) * (1 + 1e-12))


def test_lift_from_finite_p0_is_positive():
    base = capacity_bound_of(build("exponential"), 1.5)
    out = lift(base, 2.0)(np.array([0.01, 0.2]))
    assert np.all(out > 0) and np.all(np.isfinite(out))


def test_smoothing_square():
    r = singularity_smooth(power(2), 2.0, 1.0, 2.0, 0.1)
    assert r.holds and r.delta == 1.0


def test_smoothing_finite_p0_phi():
    r = singularity_smooth(phi(2), 2.0, 1.5, 1.0, 0.1)
    assert math.isfinite(r.ratio) and r.ratio > 0
    assert r.holds
    assert r.delta == pytest.approx(delta_constant(2.0, 3.0, 1.0))


def test_smoothing_rejects_equal_exponents():
    with pytest.raises(DegenerateExponents):
        singularity_smooth(power(2), 2.0, 2.0, 2.0, 0.1)


def test_oracle_examples():
    assert cap_oracle(EXP, 2.0, 0.25) == pytest.approx(1 / math.sqrt(2), rel=0.02)
    assert cap_oracle(build("uniform:0,1"), 2.0, 0.25) == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("spec", ["gaussian", "exponential", "exp_alpha:1.5", "uniform:0,1"])
@pytest.mark.parametrize("t", [0.05, 0.25])
def test_oracle_not_below_configuration(spec, t):
    m = build(spec)
    assert cap_oracle(m, 2.0, t) >= capq(m, 2.0, t) * 0.98


@pytest.mark.parametrize("spec,t", [("gaussian", 0.05), ("exponential", 0.2), ("exp_alpha:1.5", 0.1),
                                    ("uniform:0,1", 0.3)])
def test_total_variation_oracle_sandwich(spec, t):
    m = build(spec)
    p = profile_of(m)
    s = np.linspace(t, 0.5, 2001)
    inf_i = float(p.tilde(s).min())
    val = cap_oracle(m, 1.0, t)
    assert inf_i * (1 - 0.02) <= val <= inf_i * 1.02


def test_oracle_detail_reports_monotone_value():
    d = cap_oracle_detail(EXP, 2.0, 0.25)
    assert d.non_monotone_gain <= 0.02
    assert d.value <= d.monotone_value * (1 + 1e-12)


@given(st.floats(0.01, 0.49))
def test_capacity_nondecreasing_in_t(t):
    m = build("gaussian")
    assert capq(m, 2.0, t) <= capq(m, 2.0, min(t * 1.1, 0.49)) * (1 + 1e-9)
