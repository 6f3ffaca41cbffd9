"""Acceptance suite: ten numerical criteria with pinned tolerances.

Each criterion returns a :class:`CriterionResult` whose ``details`` hold
every number that was compared, so a failure can be diagnosed from the
report alone.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import hierarchy as H
from . import tensorize as TZ
from .capacity import cap_oracle, capacity_bound_of, capq
from .measures import build
from .orlicz import mazya_duality_check, parse_orlicz, phi, power, truncate_at_zero
from .profiles import (
    cheeger_constant,
    comparability_bounds,
    gaussian_constant,
    gaussian_profile,
    exponential_profile,
    measure_from_profile,
    profile_of,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    start = time.perf_counter()
    passed, details = fn()
    return CriterionResult(number, name, bool(passed), details, time.perf_counter() - start)


def c1_exponential() -> tuple[bool, dict]:
    m = build("exponential")
    che = cheeger_constant(profile_of(m))
    cap = capq(m, 2.0, 0.25)
    orc = cap_oracle(m, 2.0, 0.25)
    target = 1.0 / math.sqrt(2.0)
    ok = abs(che - 1.0) <= 1e-3 and abs(cap / target - 1) <= 0.01 and abs(orc / cap - 1) <= 0.02
    return ok, {"cheeger": che, "cap2_quarter": cap, "oracle": orc, "target": target}


def c2_gaussian() -> tuple[bool, dict]:
    m = build("gaussian")
    prof = profile_of(m)
    ref = gaussian_profile()
    t = np.concatenate((np.geomspace(1e-6, 0.5, 4000), 1.0 - np.geomspace(1e-6, 0.5, 4000)))
    err = float(np.max(np.abs(prof(t) - ref(t))))
    c1, c2 = comparability_bounds(prof.tilde, lambda s: s * np.sqrt(np.log(1.0 / s)), (1e-6, 0.4))
    ok = err <= 1e-6 and 0.5 <= c1 <= c2 <= 1.5
    return ok, {"sup_error": err, "c1": c1, "c2": c2}


def c3_mazya() -> tuple[bool, dict]:
    rows = []
    ok = True
    for mname in ("gaussian", "exponential"):
        m = build(mname)
        for spec in ("power:2", "power:3", "phi:2"):
            N = parse_orlicz(spec)
            for a in (0.1, 0.25, 0.5):
                d = mazya_duality_check(m, a, N)
                gap = d.relative_gap
                good = d.lower <= d.formula * (1 + 1e-4) and d.formula <= d.upper * (1 + 1e-4) and gap <= 1e-4
                ok &= good
                rows.append({"measure": mname, "N": spec, "a": a, "lower": d.lower, "formula": d.formula,
                             "upper": d.upper, "relative_gap": gap, "pass": good})
    return ok, {"rows": rows}


BRACKET_INSTANCES = [
    (mname, spec, q)
    for mname in ("exponential", "gaussian", "exp_alpha:1.5")
    for spec, q in (("power:2", 2.0), ("power:3", 3.0), ("power:1.5", 1.5), ("phi:2", 2.0))
]


def c4_brackets(triples: int = 200) -> tuple[bool, dict]:
    rows = []
    ok = True
    for mname, spec, q in BRACKET_INSTANCES:
        m = build(mname)
        N = parse_orlicz(spec)
        first = H.cap_to_os(capacity_bound_of(m, q), N)
        again = H.cap_to_os(H.os_to_cap(N, q, first.lo), N)
        contraction = first.seed / again.seed if again.seed > 0 else math.inf
        d1 = H.d1_test_upper(m, N, q)
        good = contraction <= 4.0 * (1 + 1e-9) and d1["upper"] >= first.lo * (1 - 1e-6)
        ok &= good
        rows.append({"measure": mname, "N": spec, "q": q, "D2": first.seed, "D1_lo": first.lo,
                     "D1_test_upper": d1["upper"], "round_trip": again.seed, "contraction": contraction,
                     "pass": good})
    em_fail = weak_fail = 0
    worst_em = 0.0
    for f, m, N in H.random_triples(triples, seed=0):
        c = H.norm_comparison(f, m, N)
        em_fail += not c.em_holds
        weak_fail += not c.weak_holds
        if c.mean_norm > 0:
            worst_em = max(worst_em, c.median_norm / c.mean_norm)
    ok &= em_fail == 0 and weak_fail == 0
    return ok, {"round_trips": rows, "em_failures": em_fail, "weak_failures": weak_fail,
                "triples": triples, "max_median_over_mean": worst_em}


def c5_counterexample() -> tuple[bool, dict]:
    m = build("cusp:0.5")
    prof = profile_of(m, refine=True)
    che = cheeger_constant(prof)
    gau = gaussian_constant(prof)
    br = H.poincare_bracket(m)
    ok = che <= 1e-6 and gau <= 1e-6 and br.lo > 0
    return ok, {"cheeger": che, "gaussian": gau, "poincare_lo": br.lo, "poincare_hi": br.hi}


def c6_consistency() -> tuple[bool, dict]:
    rows = []
    ok = True
    for mname in ("exponential", "gaussian", "exp_alpha:1.5"):
        m = build(mname)
        for q in (1.0, 1.5, 2.0, 3.0):
            r = H.consistency_loop(m, power(q), q)
            ok &= r["holds"]
            rows.append({k: r[k] for k in ("measure", "N", "q", "D_iso", "D_os", "max_bound_over_truth",
                                           "loss_factor", "holds")})
    return ok, {"loops": rows}


N2_COMBINATIONS = [
    ("phi:1", 1.0, "qstar"), ("phi:1.5", 1.5, "qstar"), ("power:1", 1.0, "qstar"), ("power:1.5", 1.5, "qstar"),
    ("power:2", 2.0, "q"), ("power:3", 3.0, "q"), ("phi:2", 2.0, "q"), ("phi:3", 3.0, "q"),
]


def _n2_args(spec: str, q: float, mode: str):
    N = parse_orlicz(spec)
    if spec.startswith("phi"):
        N = truncate_at_zero(N, q)
    if mode == "qstar":
        p1 = math.inf if q == 1 else q / (q - 1)
        return N, p1, 2.0, 2.0
    return N, q, q, q


def c7_transform_n2() -> tuple[bool, dict]:
    rows = []
    ok = True
    for spec, q, mode in N2_COMBINATIONS:
        N, p1, p2, p3 = _n2_args(spec, q, mode)
        N2 = H.transform_N2(N, p1, p2, p3)
        cert = H.transform_certificate(N2, p2, p3)
        ok &= cert["passes"]
        rows.append({"N1": N.tag, "p": [p1, p2, p3], **cert})
    return ok, {"combinations": rows}


def c8_log_sobolev() -> tuple[bool, dict]:
    m = build("gaussian")
    d_gau = gaussian_constant(profile_of(m))
    ls = H.log_sobolev_upper(m)
    floor = (1.0 / math.sqrt(2.0)) * 0.98
    ok = ls["upper"] >= floor and abs(d_gau - 1.0) <= 1e-6
    return ok, {"D_Gau": d_gau, "ls_upper": ls["upper"], "witness": ls["witness"], "floor": floor}


def c9_tensorization() -> tuple[bool, dict]:
    out = {}
    ok = True
    for J, mname in ((gaussian_profile(), "gaussian"), (exponential_profile(), "exponential")):
        mach = TZ.build_machinery(J)
        viol = TZ.envelope_violations(mach)
        lower, upper = TZ.last_thing_check(mach)
        certs = {f"{c.name}:{c.function}": c.constant for c in mach.facts}
        cert_ok = all(c.passes for c in mach.facts)
        grid = np.linspace(1e-4, 1 - 1e-4, 4001)
        bobkov = profile_of(measure_from_profile(J))
        rt = float(np.max(np.abs(bobkov(grid) - J(grid))))
        m = build(mname)
        cap = capacity_bound_of(m, 2.0)
        t = np.geomspace(1e-8, 0.49, 400)
        d2 = float(np.min(cap(t) / mach.N_wedge(t)))
        d1 = TZ.beckner_d1_upper(mach, m)
        good = (math.isfinite(mach.D) and viol["lower"] == 0 and viol["upper"] == 0 and lower >= 1 - 1e-6
                and math.isfinite(upper) and cert_ok and rt <= 1e-4 and d2 <= math.sqrt(20) * d1["upper"])
        ok &= good
        out[J.name] = {"control_rate": mach.D, "violations": viol, "last_thing": [lower, upper],
                       "upper_over_D": upper / mach.D, "certificates": certs, "bobkov_sup_error": rt,
                       "D2_capacity": d2, "beckner_D1_upper": d1["upper"], "pass": good}
    return ok, out


QLS_QS = (1.0, 1.25, 1.5, 1.75, 2.0)


def c10_qls() -> tuple[bool, dict]:
    rows = []
    for q in QLS_QS:
        r = H.qls_bridge(q, 1.0, "to_iso")
        rep = r.ledger.reported
        rows.append({"q": q, "C_Nq": rep["C_Nq"], "wedge_c1": rep["wedge_c1"], "wedge_c2": rep["wedge_c2"],
                     "lo": r.ledger.lo, "audit": r.ledger.audit()})
    cnq_floor = min(r["C_Nq"] for r in rows)
    c1 = min(r["wedge_c1"] for r in rows)
    c2 = max(r["wedge_c2"] for r in rows)
    ok = cnq_floor > 0 and 0 < c1 <= c2 < math.inf and all(r["audit"] for r in rows)
    return ok, {"rows": rows, "C_Nq_uniform_floor": cnq_floor, "wedge_uniform": [c1, c2]}


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, dict]]]] = {
    1: ("exponential Cheeger and capacity", c1_exponential),
    2: ("gaussian profile", c2_gaussian),
    3: ("dual norm of indicators", c3_mazya),
    4: ("bracket suites", c4_brackets),
    5: ("cusp counterexample", c5_counterexample),
    6: ("consistency loop", c6_consistency),
    7: ("N2 transform certification", c7_transform_n2),
    8: ("gaussian log-Sobolev anchor", c8_log_sobolev),
    9: ("tensorization machinery", c9_tensorization),
    10: ("q-log-Sobolev uniformity", c10_qls),
}


def run_criterion(number: int) -> CriterionResult:
    name, fn = CRITERIA[number]
    return _timed(number, name, fn)


def run_all(numbers=None, workers: int = 1) -> list[CriterionResult]:
    """Run the chosen criteria; results come back ordered by number."""
    numbers = sorted(CRITERIA) if numbers is None else sorted(numbers)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run_criterion, numbers))
    else:
        results = [run_criterion(n) for n in numbers]
    return sorted(results, key=lambda r: r.number)
