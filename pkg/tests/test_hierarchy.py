import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoperimetrix import hierarchy as H
from isoperimetrix.capacity import CapacityBound, capacity_bound_of
from isoperimetrix.errors import AlphaTooSmall, IntegrabilityFails, PredicateFails, QOutOfRange
from isoperimetrix.measures import build
from isoperimetrix.numerics import GridFunction
from isoperimetrix.orlicz import phi, power, truncate_at_zero
from isoperimetrix.profiles import Profile, exponential_profile, profile_of


def test_ledger_audit_and_json():
    led = H.make_ledger(2.0, [H.Factor("a", 0.5, "x"), H.Factor("b", 0.25, "y", empirical=True)], {"k": 1})
    assert led.lo == pytest.approx(0.25)
    assert led.audit()
    d = json.loads(led.to_json())
    assert d["hi"] == "inf"
    assert d["factors"][1]["empirical"] is True


def test_ledger_rejects_inverted_bracket():
    with pytest.raises(ValueError):
        H.ConstantLedger(1.0, 2.0, 1.0, (), {})


@given(st.floats(0.0, 100.0), st.lists(st.floats(1e-3, 2.0), max_size=8))
def test_ledger_product_reproduces_lo(seed, values):
    led = H.make_ledger(seed, [H.Factor(f"f{i}", v, "c") for i, v in enumerate(values)], {})
    assert led.audit()
    assert 0 <= led.lo <= led.hi


def test_os_to_iso_square_midpoint():
    r = H.os_to_iso(power(2), 2.0, 1.0)
    # (1/2)(1/4)(t(1−t))^{1/2}·t^{1/2} at t = 1/2 equals √2/32
    assert float(r.bound(0.5)) == pytest.approx(math.sqrt(2) / 32, rel=1e-12)
    assert r.ledger.lo == pytest.approx(0.125 * 2 ** -0.5, rel=1e-12)
    assert r.ledger.audit()


def test_os_to_iso_ledger_constant_is_valid():
    r = H.os_to_iso(power(2), 2.0, 1.0)
    t = np.geomspace(1e-8, 0.5, 200)
    assert np.all(r.bound.tilde(t) >= r.ledger.lo * np.sqrt(t) * np.sqrt(t) * (1 - 1e-12))


def test_os_to_iso_zero_constant():
    r = H.os_to_iso(power(2), 2.0, 0.0)
    assert np.all(r.bound(np.linspace(0, 1, 11)) == 0)
    assert r.ledger.lo == 0


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
def test_os_to_iso_phi_has_log_shape(q):
    r = H.os_to_iso(truncate_at_zero(phi(q), q), q, 1.0)
    t = np.geomspace(1e-10, 0.4, 50)
    ratio = r.bound.tilde(t) / (t * np.log(1 / t) ** (1 / q))
    assert ratio.min() > 0 and ratio.max() / ratio.min() < 10
    assert r.ledger.audit()


def test_os_to_iso_low_q_ledger_lists_smoothing():
    led = H.os_to_iso(power(1.5), 1.5, 1.0).ledger
    labels = [f.label for f in led.factors]
    assert labels[:3] == ["lift gamma^-1", "smoothing delta^-1", "capacity to Orlicz"]
    assert led.factors[-1].empirical


def test_os_to_iso_rejects_bad_q():
    with pytest.raises(QOutOfRange):
        H.os_to_iso(power(2), 0.5, 1.0)


def test_iso_to_os_exponential_square():
    led = H.iso_to_os(profile_of(build("exponential")), power(2), 2.0)
    assert [f.label for f in led.factors] == ["lift gamma", "B-estimate inf", "capacity to Orlicz"]
    assert led.factors[0].value == 1.0 and led.factors[2].value == 0.25
    assert led.lo > 0 and led.audit()
    assert led.lo <= led.hi < math.inf


def test_iso_to_os_zero_profile():
    zero = Profile(lambda t: 0 * np.asarray(t), "zero")
    assert H.iso_to_os(zero, power(2), 2.0).lo == 0.0


@pytest.mark.parametrize("alpha,q", [(0.5, 2.0), (1.0, 2.0), (1.0, 3.0), (0.75, 1.5)])
def test_b_estimate_for_homogeneous_N(alpha, q):
    # N^∧(t) = t^α gives G_p(t)/N^∧(t) = (αp)^{1/p}(1 − (2t)^{αp})^{−1/p}, with infimum (αp)^{1/p} at 0
    B, _ = H.b_estimate(power(1.0 / alpha), q)
    p = q / (q - 1)
    assert 4 * B == pytest.approx((alpha * p) ** (1 / p), rel=1e-6)


def test_closed_form_examples():
    assert H.closed_form_constants(1.0, 2.0) == pytest.approx((1.0, 1.0))
    assert H.closed_form_constants(1.0, 4.0) == pytest.approx((1.0, 1.0))
    with pytest.raises(AlphaTooSmall):
        H.closed_form_constants(0.25, 1.0)


def test_transform_square_is_sqrt():
    N2 = H.transform_N2(power(2), 2.0, 2.0, 2.0)
    t = np.geomspace(1e-12, 1e6, 80)
    np.testing.assert_allclose(N2.wedge(t), np.sqrt(t), rtol=1e-8)
    assert H.transform_certificate(N2, 2.0, 2.0)["passes"]


@pytest.mark.parametrize("spec,q", [("phi:1", 1.0), ("phi:1.5", 1.5), ("power:1.5", 1.5)])
def test_transform_young_when_p2_le_p3(spec, q):
    N = truncate_at_zero(phi(q) if spec.startswith("phi") else power(q), q)
    N2 = H.transform_N2(N, q / (q - 1) if q > 1 else math.inf, 2.0, 2.0)
    assert N2.report.is_young.holds


def test_transform_integrability_gate():
    with pytest.raises(IntegrabilityFails):
        H.transform_N2(power(4), math.inf, 2.0, 2.0)


def test_transform_predicate_gate():
    with pytest.raises(PredicateFails):
        H.transform_N2(power(2), 1.0, 2.0, 2.0)


def test_capacity_bracket_unit():
    one = CapacityBound(2.0, lambda t: np.sqrt(np.asarray(t)), "exact-config", "unit")
    led = H.cap_to_os(one, power(2))
    assert led.seed == pytest.approx(1.0, rel=1e-9)
    assert led.lo == pytest.approx(0.25, rel=1e-9) and led.hi == pytest.approx(1.0, rel=1e-9)


def test_weak_os_to_cap_square():
    b = H.os_to_cap(power(2), 2.0, 1.0, weak=True)
    t = np.geomspace(1e-6, 0.5, 30)
    np.testing.assert_allclose(b(t), np.sqrt(t), rtol=1e-12)
    assert b.diagnostics["ledger"].audit()


@pytest.mark.parametrize("spec,q", [("exponential", 2.0), ("gaussian", 2.0), ("gaussian", 3.0)])
def test_round_trip_contracts_by_at_most_four(spec, q):
    N = power(q)
    first = H.cap_to_os(capacity_bound_of(build(spec), q), N)
    again = H.cap_to_os(H.os_to_cap(N, q, first.lo), N)
    assert first.seed / again.seed <= 4 * (1 + 1e-9)


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
def test_qls_to_iso_runs(q):
    r = H.qls_bridge(q, 1.0, "to_iso")
    rep = r.ledger.reported
    assert r.ledger.lo > 0 and math.isfinite(r.ledger.lo)
    assert rep["C_Nq"] > 0 and 0 < rep["wedge_c1"] <= rep["wedge_c2"] < math.inf
    assert rep["shape_constant"] > 0
    assert r.ledger.markers
    assert r.ledger.factors[0].value == pytest.approx(1 / 3)


@pytest.mark.parametrize("q", [1.0, 2.0])
def test_qls_round_trip_bookkeeping(q):
    to = H.qls_bridge(q, 1.0, "to_iso")
    c = to.ledger.reported["shape_constant"]
    back = H.qls_bridge(q, c, "from_iso")
    assert back.ledger.audit()
    assert back.ledger.lo == pytest.approx(c * back.ledger.product, rel=1e-12)
    assert back.ledger.lo <= 1.0
    assert back.ledger.reported["alpha"] == pytest.approx(1 / (2 * q))


def test_qls_rejects_q_out_of_range():
    with pytest.raises(QOutOfRange):
        H.qls_bridge(2.5, 1.0, "to_iso")


def test_poincare_exponential():
    br = H.poincare_bracket(build("exponential"))
    assert br.reported["B"] == pytest.approx(1.0, rel=1e-6)
    assert br.lo == pytest.approx(0.5, rel=1e-6) and br.hi == pytest.approx(1.0, rel=1e-6)


def test_poincare_gaussian_contains_one():
    br = H.poincare_bracket(build("gaussian"))
    assert br.lo <= 1.0 <= br.hi


def test_poincare_cusp_positive():
    assert H.poincare_bracket(build("cusp:0.5")).lo > 0


def test_log_sobolev_gaussian_upper():
    assert H.log_sobolev_upper(build("gaussian"))["upper"] >= (1 / math.sqrt(2)) * 0.98


def test_d1_upper_dominates_capacity_lower():
    m, N = build("exponential"), power(2)
    lo = H.cap_to_os(capacity_bound_of(m, 2.0), N).lo
    assert H.d1_test_upper(m, N, 2.0)["upper"] >= lo


def test_norm_comparison_random_triples():
    for f, m, N in H.random_triples(20, seed=3):
        c = H.norm_comparison(f, m, N)
        assert c.em_holds and c.weak_holds


def test_consistency_loop_exponential():
    r = H.consistency_loop(build("exponential"), power(2), 2.0)
    assert r["holds"] and r["loss_factor"] >= 1


@given(st.floats(0.1, 10.0))
def test_os_to_iso_linear_in_constant(D):
    a = H.os_to_iso(power(2), 2.0, 1.0)
    b = H.os_to_iso(power(2), 2.0, D)
    t = np.geomspace(1e-6, 0.5, 9)
    np.testing.assert_allclose(b.bound(t), D * a.bound(t), rtol=1e-12)
