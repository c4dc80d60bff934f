import json
import subprocess
import sys

import numpy as np
import pytest

from fast_structures import io as vio
from fast_structures.cli import main
from fast_structures.core import ComplexRing, IntegerRing, ModRing


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_validate_karatsuba(capsys):
    code, out, _ = run(capsys, "validate", "--structure", "karatsuba2")
    assert code == 0
    assert "[ 1  0  0]\n  [-1  1 -1]\n  [ 0  0  1]" in out
    assert "[ 1  0]\n  [ 1  1]\n  [ 0  1]" in out
    assert out.rstrip().endswith("valid")


def test_validate_iterated(capsys):
    code, doc = run_json(capsys, "validate", "--structure", "iter:2")
    assert code == 0 and doc["valid"] and (doc["L"], doc["M"]) == (4, 9)


def test_validate_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"pre_h": [[1, 0], [1, "x"]]')
    assert run(capsys, "validate", "--structure", str(bad))[0] == 2
    shape = tmp_path / "shape.json"
    shape.write_text('{"pre_h": [[1, 0]], "pre_x": [[1, 0]], "post": [[1, 1]]}')
    assert run(capsys, "validate", "--structure", str(shape))[0] == 2
    assert run(capsys, "validate", "--structure", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "validate", "--structure", "nonsense")[0] == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"pre_h": [[1, 0], [1, 1], [0, 1]], "pre_x": [[1, 0], [1, 1], [0, 1]],
                                 "post": [[1, 0, 0], [-1, -1, -1], [0, 0, 1]]}))
    assert run(capsys, "validate", "--structure", str(wrong))[0] == 1


def test_check_fir(capsys):
    code, doc = run_json(capsys, "check", "--domain", "fir", "--L", "2", "--N", "6",
                         "--trials", "100", "--seed", "42")
    assert code == 0 and doc["passed"] == 100 and doc["failed"] == 0
    assert {t["mults_per_block"] for t in doc["trials"]} == {9}


def test_check_ntt_exhaustive(capsys):
    code, doc = run_json(capsys, "check", "--domain", "ntt", "--n", "4", "--q", "5", "--exhaustive")
    assert code == 0
    assert [t["pairs"] for t in doc["trials"]] == [5**8, 5**8]


def test_check_dft(capsys):
    code, doc = run_json(capsys, "check", "--domain", "dft", "--N", "8", "--trials", "10",
                         "--seed", "1")
    assert code == 0 and doc["max_rel_error"] <= 1e-9


@pytest.mark.parametrize("argv", [
    ["check", "--domain", "fir", "--trials", "3"],
    ["check", "--domain", "dft", "--N", "12", "--trials", "1", "--seed", "1"],
    ["check", "--domain", "ntt", "--n", "64", "--q", "17", "--trials", "1", "--seed", "1"],
    ["check", "--domain", "polymod", "--n", "4", "--q", "5", "--trials", "0", "--seed", "1"],
    ["check", "--domain", "polymod", "--n", "16", "--q", "3", "--exhaustive"],
    ["check", "--domain", "bogus"],
    ["report", "--domain", "dft", "--N", "8:3"],
    ["bench", "--domain", "foo"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_check_polymod_and_conv(capsys):
    assert run(capsys, "check", "--domain", "polymod", "--n", "4", "--q", "5", "--exhaustive")[0] == 0
    assert run(capsys, "check", "--domain", "polymod", "--n", "64", "--q", "3329",
               "--threshold", "4", "--trials", "5", "--seed", "3")[0] == 0
    assert run(capsys, "check", "--domain", "conv", "--structure", "iter:2", "--exhaustive")[0] == 0


def test_report_dft(capsys):
    code, doc = run_json(capsys, "report", "--domain", "dft", "--N", "8", "--parallel", "2")
    rec, = doc["records"]
    assert code == 0
    assert rec["mults"] == rec["formula_mults"] == 40
    assert rec["checks"]["mults_match"] and rec["schema"] == 1


def test_report_dft4_flags_adds(capsys):
    code, doc = run_json(capsys, "report", "--domain", "dft", "--N", "16:64", "--parallel", "4")
    assert code == 0 and [r["params"]["N"] for r in doc["records"]] == [16, 32, 64]
    for r in doc["records"]:
        assert r["mults"] == r["formula_mults"]
        assert r["formula_adds"] == 27 * r["params"]["N"] // 4
        assert "adds_match_reference" in r["checks"]


def test_report_conv_and_polymod(capsys):
    code, doc = run_json(capsys, "report", "--domain", "conv", "--structure", "iter:2")
    rec, = doc["records"]
    assert code == 0 and (rec["mults"], rec["direct_mults"]) == (9, 16)
    assert "formula_mults" not in rec
    code, doc = run_json(capsys, "report", "--domain", "polymod", "--n", "16", "--threshold", "2")
    rec, = doc["records"]
    assert code == 0 and (rec["mults"], rec["direct_mults"]) == (108, 256)


def test_report_fir_and_ntt(capsys):
    code, doc = run_json(capsys, "report", "--domain", "fir", "--N", "8", "--parallel", "4")
    assert code == 0 and all(doc["records"][0]["checks"].values())
    code, doc = run_json(capsys, "report", "--domain", "ntt", "--n", "256", "--q", "3329")
    assert code == 0 and all(doc["records"][0]["checks"].values())


def test_bench(capsys):
    code, doc = run_json(capsys, "bench", "--domain", "ntt", "--n", "256", "--q", "3329",
                         "--repeats", "3")
    assert code == 0 and doc["fast_median_s"] > 0 and doc["direct_median_s"] > 0
    code, doc = run_json(capsys, "bench", "--domain", "dft", "--N", "64", "--repeats", "1")
    assert code == 0 and doc["params"]["repeats"] == 1


def test_out_file_and_no_timing(capsys, tmp_path):
    out = tmp_path / "r.json"
    argv = ["check", "--domain", "ntt", "--n", "16", "--q", "257", "--trials", "4", "--seed", "9",
            "--no-timing", "--out", str(out)]
    assert run(capsys, *argv)[0] == 0
    first = out.read_bytes()
    assert b"elapsed_s" not in first
    assert run(capsys, *argv)[0] == 0
    assert out.read_bytes() == first


@pytest.mark.parametrize("fmt", ["csv", "json", "bin", "hex"])
def test_io_round_trip(tmp_path, fmt):
    r = ModRing(3329)
    v = r.array([0, 1, 3328, 1234])
    path = tmp_path / f"v.{fmt}"
    vio.write_vector(path, v, r)
    assert vio.read_vector(path, r).tolist() == v.tolist()


def test_io_formats():
    r = ModRing(3329)
    assert vio.format_vector([1, 3328], "hex", r) == "0100000d\n"
    assert vio.parse_vector("0100 000d", "hex", r).tolist() == [1, 3328]
    assert vio.parse_vector("1,2\n3\n", "csv", IntegerRing()).tolist() == [1, 2, 3]
    c = ComplexRing()
    z = vio.parse_vector(vio.format_vector([1 + 2j, -0.5j], "json", c), "json", c)
    assert np.array_equal(z, [1 + 2j, -0.5j])
    assert np.array_equal(vio.parse_vector("1.0,2.0\n3.0,-1.0\n", "csv", c), [1 + 2j, 3 - 1j])
    with pytest.raises(ValueError):
        vio.parse_vector("010", "hex", r)


def test_run_command(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.csv"
    a.write_text("[1, 2, 3, 4]")
    b.write_text("1\n0\n0\n1\n")
    code, out, err = run(capsys, "run", "--domain", "polymod", "--q", "17",
                         "--coeffs", str(a), "--in", str(b))
    assert code == 0 and out.split() == ["16", "16", "16", "5"]
    assert json.loads(err)["mults"] == 12
    dest = tmp_path / "p.hex"
    assert run(capsys, "run", "--domain", "ntt", "--q", "17", "--coeffs", str(a), "--in", str(b),
               "--out", str(dest))[0] == 0
    assert vio.read_vector(dest, ModRing(17)).tolist() == [16, 16, 16, 5]
    h = tmp_path / "h.csv"
    h.write_text("1\n2\n")
    x = tmp_path / "x.csv"
    x.write_text("3\n4\n5\n")
    code, out, _ = run(capsys, "run", "--domain", "fir", "--coeffs", str(h), "--in", str(x))
    assert code == 0 and out.split() == ["3", "10", "13", "10"]
    assert run(capsys, "run", "--domain", "ntt", "--coeffs", str(a), "--in", str(b))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fast_structures", "validate", "--structure",
                           "karatsuba2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout


def test_log_env(capsys, monkeypatch):
    monkeypatch.setenv("FAST_STRUCTURES_LOG", "debug")
    assert main(["validate", "--structure", "karatsuba2"]) == 0
