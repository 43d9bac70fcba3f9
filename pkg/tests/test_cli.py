import csv
import io
import json
import subprocess
import sys

import pytest

from vml import cli


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.setenv("VML_CACHE_DIR", str(tmp_path / "cache"))
    files = {
        "gauss.json": {"kind": "product", "law": {"type": "gaussian", "sigma_rule": "1"}},
        "rad.json": {"kind": "product", "law": {"type": "rademacher"}},
        "circle.json": {"kind": "circle", "window": 4, "convention": "complex"},
        "zero.json": {"finite": []},
        "recip.json": {"rule": "1/n"},
        "fns.json": ["square_wave"],
        "chi.json": {"gaussian": {"scale": 1}},
        "badlaw.json": {"kind": "product", "law": {"type": "gaussian", "sigma": "1"}},
    }
    for name, doc in files.items():
        (tmp_path / name).write_text(json.dumps(doc))
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_charfun_zero(work, capsys):
    code, out, _ = run(capsys, "charfun", "eval", "--measure", "gauss.json", "--coeffs", "zero.json", "--mc", "1000", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and (d["re"], d["im"], d["stderr"]) == (1.0, 0.0, 0.0)


def test_cache_and_byte_identity(work, capsys):
    args = ["charfun-eval", "--measure", "gauss.json", "--coeffs", "recip.json", "--mc", "5000", "--seed", "3"]
    run(capsys, *args, "--out", "a.json", "--record", "ra.json")
    run(capsys, *args, "--out", "b.json", "--record", "rb.json")
    run(capsys, *args, "--out", "c.json", "--no-cache")
    a, b, c = ((work / n).read_bytes() for n in ("a.json", "b.json", "c.json"))
    assert a == b == c
    ra, rb = (json.loads((work / n).read_text()) for n in ("ra.json", "rb.json"))
    assert not ra["cached"] and rb["cached"]
    assert ra["config_hash"] == rb["config_hash"]
    assert list((work / "cache").glob(".tmp-*")) == []


def test_seed_changes_hash(work):
    o = {"measure": {"kind": "circle", "window": 2}}
    assert cli.config_hash("sample", o, 1) != cli.config_hash("sample", o, 2)


def test_schema_violation_exit_2(work, capsys):
    code, _, err = run(capsys, "charfun-eval", "--measure", "badlaw.json", "--coeffs", "zero.json")
    e = json.loads(err)
    assert code == 2 and e["pointer"] == "--measure#/law" and "sigma" in e["message"]


def test_missing_file_and_flag(work, capsys):
    assert run(capsys, "sample", "--measure", "nope.json")[0] == 2
    assert run(capsys, "sample")[0] == 2


def test_module_error_exit_3(work, capsys):
    (work / "div.json").write_text(json.dumps({"rule": "1/sqrt(n)"}))
    code, _, err = run(capsys, "realize", "--measure", "gauss.json", "--coeffs", "div.json")
    assert code == 3 and json.loads(err)["error"] == "module"
    code, _, _ = run(capsys, "kernel-check", "--measure", "rad.json", "--shift", "recip.json")
    assert code == 3


def test_free_demo_csv_decreasing(work, capsys):
    code, out, _ = run(capsys, "free", "demo", "--functions", "fns.json", "--windows", "8,32,128", "--mc", "20000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    errs = [float(r["l2_error"]) for r in rows]
    assert code == 0 and len(rows) == 3 and errs[0] > errs[1] > errs[2]


def test_csv_unavailable(work, capsys):
    code, _, err = run(capsys, "charfun-eval", "--measure", "gauss.json", "--coeffs", "zero.json", "--format", "csv")
    assert code == 2 and json.loads(err)["pointer"] == "--format"


def test_kernel_check_report(work, capsys):
    code, out, _ = run(capsys, "kernel", "check", "--measure", "gauss.json", "--shift", "recip.json", "--mc", "20000")
    d = json.loads(out)
    assert code == 0 and d["membership"] == "member"
    assert abs(d["norm_sq"] - 1.6449340668) < 1e-8
    assert len(d["qi_tests"]) == 4 and all(t["passed"] for t in d["qi_tests"])


def test_spectral_build_and_verify(work, capsys):
    code, _, _ = run(capsys, "spectral", "build", "--chi", "chi.json", "--cylinders", "auto:3", "--grid", "L=12,M=1024", "--weights", "1/n^2", "--mc", "1000", "--out", "model.json")
    model = json.loads((work / "model.json").read_text())
    assert code == 0 and model["tightness_report"]["verdict"] == "tight"
    code, out, _ = run(capsys, "spectral-verify", "--model", "model.json", "--mc", "20000", "--trials", "10")
    d = json.loads(out)
    assert code == 0 and d["within_3se"] >= 9


def test_sample_and_realize(work, capsys):
    code, out, _ = run(capsys, "sample", "--measure", "circle.json", "--truncation", "3", "--mc", "4")
    d = json.loads(out)
    assert code == 0 and len(d["re"]) == 4 and d["indices"] == [-3, -2, -1, 0, 1, 2, 3]
    (work / "gens.json").write_text(json.dumps([{"rule": "2^-n"}, {"finite": [1.0]}]))
    code, out, _ = run(capsys, "realize", "--measure", "gauss.json", "--coeffs", "gens.json", "--mc", "500", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "2^-n,finite[1]"


def test_linfun_test(work, capsys):
    code, out, _ = run(capsys, "linfun-test", "--measure", "rad.json", "--coeffs", "recip.json", "--mc", "2000")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "converges" and len(d["cauchy"]) == 6


def test_verify_trivial_and_unknown(work, capsys):
    code, out, _ = run(capsys, "verify", "--suite", "trivial")
    assert code == 0 and json.loads(out)["passed"]
    assert run(capsys, "verify", "--suite", "nope")[0] == 2
    assert run(capsys, "verify", "--checks", "trivial_zero_series,bogus")[0] == 2
    assert run(capsys, "verify", "--inject", "nope")[0] == 2


def test_injected_fault_fails_kernel_checks(work, capsys):
    code, out, _ = run(capsys, "verify", "--checks", "c3_cm_mean", "--inject", "cm_sign")
    assert code == 1 and not json.loads(out)["passed"]


def test_module_entry_point(work):
    res = subprocess.run([sys.executable, "-m", "vml", "verify", "--list"], capture_output=True, text=True)
    assert res.returncode == 0 and "acceptance" in res.stdout
