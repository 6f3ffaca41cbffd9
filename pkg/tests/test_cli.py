import json
import math
import subprocess
import sys

import pytest

from isoperimetrix import cli
from isoperimetrix import verify as V
from isoperimetrix.errors import UsageError


def _run(argv):
    report, status = cli.run(cli.parse(argv))
    return report, status


def test_parse_profile_csv():
    cmd = cli.parse(["profile", "--measure", "gaussian", "--out", "p.csv"])
    assert (cmd.verb, cmd.action, cmd.params, cmd.out, cmd.fmt) == ("profile", "show", {"measure": "gaussian"},
                                                                    "p.csv", "csv")


def test_parse_transfer():
    cmd = cli.parse("transfer os-to-iso --N power:2 --q 2 --D 1".split())
    assert cmd.action == "os-to-iso"
    assert cmd.params == {"N": "power:2", "q": 2.0, "D": 1.0}


def test_parse_verify_suite():
    cmd = cli.parse("verify all --suite paper".split())
    assert (cmd.verb, cmd.action, cmd.params) == ("verify", "all", {"suite": "paper"})


@pytest.mark.parametrize("argv", [["bogus"], ["profile", "--nope", "1"], ["constant", "volume"], ["norm", "--q", "x"]])
def test_parse_rejects(argv):
    with pytest.raises(UsageError):
        cli.parse(argv)


def test_cheeger_exponential():
    report, status = _run("constant cheeger --measure exponential --no-timestamp".split())
    assert status == 0
    assert report["result"]["value"] == pytest.approx(1.0, abs=1e-6)
    assert report["schema"] == "report/v1"
    assert len(report["config_hash"]) == 16


def test_os_to_iso_report_has_ledger():
    report, status = _run("transfer os-to-iso --N power:2 --q 2 --D 1 --no-timestamp".split())
    assert status == 0
    led = report["ledger"][0]
    assert led["lo"] == pytest.approx(0.125 / math.sqrt(2), rel=1e-12)
    assert all(f["citation"] for f in led["factors"])


def test_mazya_verification_passes():
    report, status = _run("verify mazya-duality --measure gaussian --N phi:2 --a 0.25 --no-timestamp".split())
    assert status == 0 and report["diagnostics"]["verification_passed"]


def test_tensor_machinery_bundle():
    report, status = _run("tensor machinery --profile-from gaussian --no-timestamp".split())
    assert status == 0
    assert {"g", "J0", "J1", "N_wedge", "T", "certificates"} <= set(report["result"])


def test_failed_verification_exits_two(monkeypatch):
    monkeypatch.setitem(V.CRITERIA, 5, ("always fails", lambda: (False, {})))
    _, status = _run("verify criterion --id 5 --no-timestamp".split())
    assert status == 2


def test_computation_error_exits_one():
    report, status = _run("constant cheeger --measure uniform:2,1 --no-timestamp".split())
    assert status == 1
    assert report["diagnostics"]["error"] == "SpecError"


def test_determinism_bytes():
    argv = "capacity half --measure gaussian --q 2 --t 0.1 --no-timestamp".split()
    a = cli.render(*_with_fmt(argv))
    b = cli.render(*_with_fmt(argv))
    assert a == b


def _with_fmt(argv):
    report, _ = _run(argv)
    return report, "json"


def test_timestamp_present_by_default():
    report, _ = _run("constant cheeger --measure exponential".split())
    assert "timestamp" in report


def test_csv_series_output(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["profile", "--measure", "exponential", "--out", str(out), "--no-timestamp"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,")
    assert len(lines) > 10


def test_main_usage_error_exit(capsys):
    assert cli.main(["bogus"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["diagnostics"]["error"] == "UsageError"


def test_module_entry_point_identical_bytes(tmp_path):
    argv = [sys.executable, "-m", "isoperimetrix", "transfer", "closed-form", "--alpha", "1", "--q", "2",
            "--no-timestamp"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["result"]
