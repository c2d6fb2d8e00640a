import csv
import io
import json

import pytest

from hkperc.cli import main


def call(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def doc_of(capsys, *argv):
    code, out, err = call(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_run_random_trials(capsys):
    d = doc_of(capsys, "run", "--family", "hypercube", "--n", "12", "--process", "majority",
               "--p", "0.5", "--trials", "10", "--seed", "7")
    assert len(d["records"]) == 10
    assert all({"percolated", "rounds"} <= set(r) for r in d["records"])
    assert d["config"]["seed"] == 7 and d["config"]["process"]["m"] == 0


def test_run_initial_sets(capsys):
    d = doc_of(capsys, "run", "--family", "folded", "--n", "3", "--process", "majority",
               "--initial", "00,11")
    assert d["records"][0]["percolated"] and d["records"][0]["rounds"] == 1
    d = doc_of(capsys, "run", "--family", "hypercube", "--n", "1", "--process", "majority",
               "--initial", "")
    assert not d["records"][0]["percolated"]


def test_pc_reports_theory(capsys):
    d = doc_of(capsys, "pc", "--family", "hypercube", "--n", "1", "--trials", "100000",
               "--seed", "1")
    assert d["pc"]["median"] == pytest.approx(0.2929, abs=0.01)
    assert d["theory"] is None
    d = doc_of(capsys, "pc", "--family", "hypercube", "--n", "20", "--trials", "4")
    # 1/2 - sigma(20)/2 with sigma(20) = 0.3870227560 (mpmath, 30 digits)
    assert d["theory"]["pc_tilde"] == pytest.approx(0.3064886220, abs=1e-9)


def test_scan_monotone_and_csv(capsys):
    code, out, _ = call(capsys, "scan", "--family", "hypercube", "--n", "16", "--grid",
                        "0.30:0.50:0.01", "--trials", "200", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["p"]) for r in rows] == [round(0.30 + i / 100, 2) for i in range(21)]
    phis = [float(r["phi_hat"]) for r in rows]
    assert phis == sorted(phis)
    assert {"ci_low", "ci_high", "pc_tilde", "lower", "upper", "bbm"} <= set(rows[0])


def test_scan_identical_across_workers(capsys, monkeypatch):
    argv = ["scan", "--family", "torus", "--dims", "6,6", "--grid", "0:1:0.05", "--trials",
            "3000", "--seed", "9"]
    _, a, _ = call(capsys, *argv, "--workers", "1")
    _, b, _ = call(capsys, *argv, "--workers", "8")
    monkeypatch.setenv("HKPERC_WORKERS", "4")
    _, c, _ = call(capsys, *argv)
    assert a == b == c


def test_certify_exit_codes(capsys, tmp_path):
    code, out, _ = call(capsys, "certify", "--family", "middle-layer", "--n", "4", "--K", "4",
                        "--ell-max", "2")
    assert code == 0 and json.loads(out)["certificate"]["passed"]
    code, _, _ = call(capsys, "certify", "--family", "hypercube", "--n", "6", "--K", "2",
                      "--ell-max", "3")
    assert code == 0
    k8 = tmp_path / "k8.txt"
    k8.write_text("".join(f"{i} {j}\n" for i in range(8) for j in range(i + 1, 8)))
    code, out, _ = call(capsys, "certify", "--edge-list", str(k8), "--K", "1", "--ell-max", "1")
    assert code == 2
    props = {p["property"]: p for p in json.loads(out)["certificate"]["properties"]}
    assert props["P2"]["verdict"] == "fail" and props["P2"]["witness"]["measured"] == 7


def test_exact_command(capsys):
    d = doc_of(capsys, "exact", "--family", "hypercube", "--n", "2", "--p", "0.5")
    assert d["rows"] == [{"p": 0.5, "phi": 0.9375}]
    assert d["exact_pc"] == pytest.approx(0.1591035847, abs=2e-9)


def test_families_command(capsys):
    d = doc_of(capsys, "families")
    assert {f["family"] for f in d["families"]} >= {"hypercube", "odd", "explicit"}
    d = doc_of(capsys, "families", "--family", "odd", "--n", "3")
    assert d["graph"]["order"] == 10


def test_output_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    code, text, _ = call(capsys, "exact", "--family", "hypercube", "--n", "1", "--p", "0.5",
                         "--out", str(out))
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["rows"][0]["phi"] == 0.75


@pytest.mark.parametrize("argv", [
    ["run", "--family", "hypercube"],
    ["run", "--family", "hypercube", "--n", "3"],
    ["bogus"],
    ["scan", "--family", "hypercube", "--n", "3", "--grid", "0.5:0.1:0.1"],
    ["run", "--family", "folded", "--n", "2", "--p", "0.5"],
    ["run", "--family", "hypercube", "--n", "2", "--initial", "0x"],
    ["certify", "--family", "hypercube", "--n", "3", "--ell-max", "9"],
    ["run", "--family", "hypercube", "--n", "3", "--p", "0.5", "--initial", "000"],
    ["run", "--edge-list", "/nonexistent/file", "--p", "0.5"],
])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1 and err


def test_guard_exit_codes(capsys):
    code, _, err = call(capsys, "exact", "--family", "hypercube", "--n", "6", "--p", "0.5")
    assert code == 3 and "guard" in err
    code, _, _ = call(capsys, "run", "--family", "grid", "--dims", "2,5", "--process",
                      "rneighbour", "--r", "1", "--max-rounds", "2", "--initial", "(0,0)")
    assert code == 3
    d = doc_of(capsys, "run", "--family", "odd", "--n", "3", "--initial", "{1,2},{3,4}")
    assert d["config"]["initial"] == ["{1,2}", "{3,4}"]
    # seeding both ends finishes the 2x5 grid within the same round limit
    d = doc_of(capsys, "run", "--family", "grid", "--dims", "2,5", "--process", "rneighbour",
               "--r", "1", "--max-rounds", "2", "--initial", "(0,0),(1,4)")
    assert d["records"][0]["percolated"] and d["records"][0]["rounds"] == 2
