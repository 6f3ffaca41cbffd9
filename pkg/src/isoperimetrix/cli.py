"""Batch command line: ``isoperimetrix <verb> <action> [flags]``.

Every run produces a "report/v1" document (JSON, or CSV for series) with the
echoed command, inputs, result, constant ledgers, diagnostics, package
version and a hash of the quadrature configuration.  Exit status is 0 on
success, 1 on a computation or usage error and 2 when a verification ran
but its inequality failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import hierarchy as H
from . import tensorize as TZ
from . import verify as V
from .capacity import _config_capacities, cap_oracle, capq, interval_capacity
from .config import config_hash, load_config
from .errors import IsoperimetrixError, UsageError
from .measures import build, read_grid_csv
from .numerics import GridFunction
from .orlicz import (
    dual_norm_indicator,
    expectation,
    mazya_duality_check,
    median_of,
    orlicz_norm,
    parse_orlicz,
    weak_orlicz_norm,
)
from .profiles import cheeger_scan, gaussian_scan, profile_of

SCHEMA = "report/v1"

ACTIONS = {
    "profile": ("show",),
    "norm": ("indicator", "function"),
    "capacity": ("half", "interval"),
    "constant": ("cheeger", "gaussian", "poincare", "log-sobolev"),
    "transfer": ("os-to-iso", "iso-to-os", "cap-to-os", "os-to-cap", "qls-to-iso", "qls-from-iso",
                 "transform-n2", "closed-form"),
    "tensor": ("machinery", "control-rate", "last-thing", "halfspace"),
    "verify": ("all", "criterion", "mazya-duality", "median-mean"),
}
DEFAULT_ACTION = {"profile": "show", "norm": "indicator", "capacity": "half"}


@dataclass(frozen=True)
class Command:
    verb: str
    action: str
    params: dict
    out: str | None = None
    fmt: str = "json"
    timestamp: bool = True
    argv: tuple[str, ...] = field(default=())


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D401 - argparse hook
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    top = _Parser(prog="isoperimetrix", description="Isoperimetric, Orlicz and capacity computations on 1-D measures.")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, actions in ACTIONS.items():
        p = sub.add_parser(verb)
        p.add_argument("action", nargs="?" if verb in DEFAULT_ACTION else None, choices=actions,
                       default=DEFAULT_ACTION.get(verb))
        p.add_argument("--measure")
        p.add_argument("--N", dest="N")
        p.add_argument("--q", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--D", dest="D", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--t", type=float)
        p.add_argument("--grid", help="CSV file (x,value) holding a piecewise-linear function")
        p.add_argument("--rel-tol", dest="rel_tol", type=float)
        p.add_argument("--out")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"))
        p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true")
        if verb == "profile":
            p.add_argument("--refine", action="store_true")
            p.add_argument("--points", type=int)
        if verb == "transfer":
            p.add_argument("--weak", action="store_true")
            p.add_argument("--p1", type=float)
            p.add_argument("--p2", type=float)
            p.add_argument("--p3", type=float)
        if verb == "tensor":
            p.add_argument("--profile-from", dest="profile_from")
            p.add_argument("--k", type=int)
        if verb == "verify":
            p.add_argument("--suite", choices=("paper",))
            p.add_argument("--id", dest="criterion", type=int)
            p.add_argument("--count", type=int)
            p.add_argument("--workers", type=int)
    return top


_GLOBAL = ("verb", "action", "out", "fmt", "no_timestamp")


def parse(argv) -> Command:
    argv = list(argv)
    ns = _parser().parse_args(argv)
    fmt = ns.fmt or ("csv" if ns.out and ns.out.endswith(".csv") else "json")
    params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL and v is not None and v is not False}
    return Command(ns.verb, ns.action, params, ns.out, fmt, not ns.no_timestamp, tuple(argv))


# --- helpers -------------------------------------------------------------------------------


def _need(params: dict, *keys: str) -> list:
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return [params[k] for k in keys]


def _clean(obj):
    """Recursively convert numpy values and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, H.ConstantLedger):
        return _clean(obj.as_dict())
    return obj


def _series(fn, lo: float = 1e-8, n: int = 257) -> dict:
    t = np.geomspace(lo, 0.5, n)
    return {"t": t, "value": np.asarray(fn(t), dtype=float)}


# --- verb handlers ---------------------------------------------------------------------------
# each returns (result, ledgers, diagnostics, verification_passed | None)


def _profile(cmd: Command, cfg):
    (spec,) = _need(cmd.params, "measure")
    prof = profile_of(build(spec), refine=bool(cmd.params.get("refine")))
    n = int(cmd.params.get("points") or 257)
    half = np.geomspace(1e-8, 0.5, (n + 1) // 2)
    t = np.concatenate((half, 1.0 - half[-2::-1]))
    return {"series": {"t": t, "J": prof(t)}, "flag": prof.flag}, [], {"flag": prof.flag}, None


def _norm(cmd: Command, cfg):
    (nspec,) = _need(cmd.params, "N")
    N = parse_orlicz(nspec)
    if cmd.action == "indicator":
        (a,) = _need(cmd.params, "a")
        res = {"mass": a, "norm": float(N.wedge(np.array(a)))}
        try:
            res["dual_norm"] = dual_norm_indicator(None, a, N)
        except IsoperimetrixError as exc:
            res["dual_norm"] = None
            return res, [], {"dual_norm": str(exc)}, None
        return res, [], {}, None
    spec, path = _need(cmd.params, "measure", "grid")
    m = build(spec)
    x, v = read_grid_csv(path)
    f = GridFunction(x, v)
    med = median_of(f, m)
    res = {
        "norm": orlicz_norm(f, m, N),
        "weak_norm": weak_orlicz_norm(f, m, N),
        "median": med,
        "expectation": expectation(f, m),
        "median_centered_norm": orlicz_norm(f.shifted(med), m, N),
    }
    return res, [], {}, None


def _capacity(cmd: Command, cfg):
    spec, q = _need(cmd.params, "measure", "q")
    m = build(spec)
    if cmd.action == "interval":
        a, b = _need(cmd.params, "a", "b")
        val, flag = interval_capacity(m, a, b, q, cfg, with_flag=True)
        return {"a": a, "b": b, "q": q, "capacity": val}, [], {"integral": flag}, None
    t = cmd.params.get("t", 0.25)
    res = {"t": t, "q": q, "capacity": capq(m, q, t, cfg=cfg), "oracle": cap_oracle(m, q, t)}
    diag = {}
    if q > 1 and t < 0.5:
        diag["configurations"] = _config_capacities(m, q, t, cfg)
    return res, [], diag, None


def _constant(cmd: Command, cfg):
    (spec,) = _need(cmd.params, "measure")
    m = build(spec)
    if cmd.action in ("cheeger", "gaussian"):
        prof = profile_of(m)
        scan = cheeger_scan(prof) if cmd.action == "cheeger" else gaussian_scan(prof)
        return ({"value": scan.value, "argmin": scan.argmin}, [],
                {"profile_flag": prof.flag, "scan": scan.diagnostic}, None)
    if cmd.action == "poincare":
        led = H.poincare_bracket(m)
        return {"lo": led.lo, "hi": led.hi}, [led], {"markers": list(led.markers)}, None
    ls = H.log_sobolev_upper(m)
    return {"upper": ls["upper"]}, [], {"witness": ls["witness"], "kind": "test-function upper bound"}, None


def _transfer(cmd: Command, cfg):
    p, act = cmd.params, cmd.action
    if act == "os-to-iso":
        nspec, q, D = _need(p, "N", "q", "D")
        res = H.os_to_iso(parse_orlicz(nspec), q, D)
        return {"lo": res.ledger.lo, "series": _series(res.bound.tilde)}, [res.ledger], {}, None
    if act == "iso-to-os":
        spec, nspec, q = _need(p, "measure", "N", "q")
        led = H.iso_to_os(profile_of(build(spec)), parse_orlicz(nspec), q)
        return {"lo": led.lo, "hi": led.hi}, [led], {}, None
    if act == "cap-to-os":
        from .capacity import capacity_bound_of

        spec, nspec, q = _need(p, "measure", "N", "q")
        led = H.cap_to_os(capacity_bound_of(build(spec), q), parse_orlicz(nspec), weak=bool(p.get("weak")))
        return {"lo": led.lo, "hi": led.hi}, [led], {}, None
    if act == "os-to-cap":
        nspec, q, D = _need(p, "N", "q", "D")
        cb = H.os_to_cap(parse_orlicz(nspec), q, D, weak=bool(p.get("weak")))
        return {"series": _series(cb)}, [cb.diagnostics["ledger"]], {}, None
    if act in ("qls-to-iso", "qls-from-iso"):
        q, D = _need(p, "q", "D")
        res = H.qls_bridge(q, D, "to_iso" if act == "qls-to-iso" else "from_iso")
        return {"lo": res.ledger.lo}, [res.ledger], {"markers": list(res.ledger.markers)}, None
    if act == "transform-n2":
        nspec, p1, p2, p3 = _need(p, "N", "p1", "p2", "p3")
        N2 = H.transform_N2(parse_orlicz(nspec), p1, p2, p3)
        cert = H.transform_certificate(N2, p2, p3)
        return {"certificate": cert, "series": _series(N2.wedge, 1e-8)}, [], {"predicates": N2.report.as_dict()}, None
    alpha, q = _need(p, "alpha", "q")
    C, B = H.closed_form_constants(alpha, q)
    return {"C": C, "B": B}, [], {}, None


def _tensor_profile(p: dict):
    (spec,) = _need(p, "profile_from")
    return profile_of(build(spec))


def _tensor(cmd: Command, cfg):
    p, act = cmd.params, cmd.action
    if act == "halfspace":
        spec, t = _need(p, "measure", "t")
        k = int(p.get("k") or 1)
        return {"k": k, "t": t, "upper": TZ.coordinate_halfspace_upper(build(spec), k, t)}, [], {}, None
    J = _tensor_profile(p)
    if act == "control-rate":
        return {"control_rate": TZ.control_rate(J), "limsup_ratio": TZ.limsup_ratio(J)}, [], {}, None
    mach = TZ.build_machinery(J)
    if act == "last-thing":
        lo, hi = TZ.last_thing_check(mach)
        ok = lo >= 1 - 1e-6 and math.isfinite(hi)
        return {"lower": lo, "upper": hi, "upper_over_D": hi / mach.D}, [], {}, ok
    bundle = mach.as_dict()
    viol = TZ.envelope_violations(mach)
    ok = all(c.passes for c in mach.facts) and viol["lower"] == 0 and viol["upper"] == 0
    return bundle, [], {"envelope_violations": viol}, ok


def _verify(cmd: Command, cfg):
    p, act = cmd.params, cmd.action
    if act in ("all", "criterion"):
        nums = None if act == "all" else _need(p, "criterion")
        results = V.run_all(nums, workers=int(p.get("workers") or 1))
        res = {"criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "seconds": r.seconds,
                             "details": r.details} for r in results]}
        return res, [], {"lines": [r.line() for r in results]}, all(r.passed for r in results)
    if act == "mazya-duality":
        spec, nspec, a = _need(p, "measure", "N", "a")
        d = mazya_duality_check(build(spec), a, parse_orlicz(nspec))
        ok = d.lower <= d.formula * (1 + 1e-4) and d.formula <= d.upper * (1 + 1e-4) and d.relative_gap <= 1e-4
        return {"lower": d.lower, "formula": d.formula, "upper": d.upper, "relative_gap": d.relative_gap}, [], {}, ok
    count = int(p.get("count") or 200)
    fails = 0
    for f, m, N in H.random_triples(count):
        c = H.norm_comparison(f, m, N)
        fails += not (c.em_holds and c.weak_holds)
    return {"triples": count, "failures": fails}, [], {}, fails == 0


HANDLERS = {
    "profile": _profile,
    "norm": _norm,
    "capacity": _capacity,
    "constant": _constant,
    "transfer": _transfer,
    "tensor": _tensor,
    "verify": _verify,
}


def run(cmd: Command) -> tuple[dict, int]:
    """Execute a parsed command; returns (report, exit status)."""
    report = {
        "schema": SCHEMA,
        "command": {"verb": cmd.verb, "action": cmd.action, "argv": list(cmd.argv)},
        "inputs": dict(cmd.params),
        "version": __version__,
    }
    status = 0
    try:
        cfg = load_config(overrides={"rel_tol": cmd.params.get("rel_tol")})
        report["config_hash"] = config_hash(cfg)
        result, ledgers, diag, verdict = HANDLERS[cmd.verb](cmd, cfg)
        report["result"] = result
        report["ledger"] = [led.as_dict() for led in ledgers]
        report["diagnostics"] = diag
        if verdict is not None:
            report["diagnostics"]["verification_passed"] = bool(verdict)
            status = 0 if verdict else 2
    except (IsoperimetrixError, ValueError, OSError) as exc:
        report.setdefault("result", None)
        report.setdefault("ledger", [])
        report["diagnostics"] = {"error": type(exc).__name__, "message": str(exc)}
        status = 1
    if cmd.timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return _clean(report), status


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    result = report.get("result") or {}
    series = result.get("series") if isinstance(result, dict) else None
    if series:
        keys = list(series)
        writer.writerow(keys)
        for row in zip(*(series[k] for k in keys)):
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    else:
        writer.writerow(["key", "value"])
        for k, v in sorted((result or {}).items()):
            writer.writerow([k, json.dumps(v, sort_keys=True)])
    return buf.getvalue()


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd = parse(argv)
    except UsageError as exc:
        report = {"schema": SCHEMA, "command": {"argv": argv}, "result": None, "ledger": [],
                  "diagnostics": {"error": "UsageError", "message": str(exc)}, "version": __version__}
        sys.stderr.write(json.dumps(report, sort_keys=True) + "\n")
        return 1
    report, status = run(cmd)
    text = render(report, cmd.fmt)
    if cmd.out:
        with open(cmd.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cmd.verb == "verify" and cmd.action in ("all", "criterion") and "lines" in report.get("diagnostics", {}):
        for line in report["diagnostics"]["lines"]:
            sys.stderr.write(line + "\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
