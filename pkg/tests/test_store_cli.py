import csv
import io
import json
import subprocess
import sys

from hypothesis import given, strategies as st
from mpmath import mpf

from lvalues import store
from lvalues.cli import main
from lvalues.eigenforms import eigenforms


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(-300, 300))
def test_real_round_trip(man, exp):
    x = mpf(man) * mpf(2) ** exp
    y = store.decode_real(store.encode_real(x))
    assert y == x and y._mpf_ == x._mpf_


def test_eigen_cache_round_trip(cache_dir):
    a = store.get_eigenforms(24, 150)
    store.clear_memory()
    b = store.get_eigenforms(24, 150)
    assert [f.lam for f in a] == [f.lam for f in b]
    assert [f.lam_err for f in a] == [f.lam_err for f in b]
    assert all(x._mpf_ == y._mpf_ for f, g in zip(a, b) for x, y in zip(f.lam, g.lam))
    assert len(list(cache_dir.glob("eigen_*.json"))) == 1


def test_corrupted_cache_recomputes(cache_dir):
    ref = eigenforms(12, 200)
    store.get_eigenforms(12, 200)
    (path,) = cache_dir.glob("eigen_*.json")
    entry = json.loads(path.read_text())
    entry["payload"][0]["lam"][2] = store.encode_real(mpf(5))
    path.write_text(json.dumps(entry))
    store.clear_memory()
    (f,) = store.get_eigenforms(12, 200)
    assert f.lam == ref[0].lam
    # a truncated file is also recomputed rather than partially loaded
    path.write_text(path.read_text()[:100])
    store.clear_memory()
    (g,) = store.get_eigenforms(12, 200)
    assert g.lam == ref[0].lam


def test_dims_csv(capsys):
    code, out, _ = run(["dims", "--kmax", "30"], capsys)
    assert code == 0
    rows = {int(r["k"]): int(r["dim"]) for r in csv.DictReader(io.StringIO(out))}
    assert rows[26] == 1 and rows[28] == 2 and rows[14] == 0 and rows[12] == 1
    assert all(r["schema_version"] == "1" for r in csv.DictReader(io.StringIO(out)))


def test_trace_check_json(capsys):
    code, out, _ = run(["trace-check", "--k", "12", "--m", "2", "--n", "3", "--cmax", "50", "--json"], capsys)
    assert code == 0
    (line,) = out.strip().splitlines()
    rec = json.loads(line)
    assert rec["kind"] == "trace_check" and "discrepancy" in rec
    assert float(rec["discrepancy"]) < 1e-4
    assert rec["rhs_delta"] == 0


def test_count_extreme_threshold(capsys):
    code, out, _ = run(["count-extreme", "--k", "100", "--d", "1", "--json"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert abs(float(rec["threshold"]) - 11.57) < 1e-2
    assert rec["count"] <= rec["dim"]


def test_lvalue_prints_convention(capsys):
    code, out, _ = run(["lvalue", "--k", "12", "--d", "5", "--json"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert "convention" in rec and float(rec["value"]) >= -float(rec["err"])


def test_exit_codes(capsys):
    assert run(["bogus"], capsys)[0] == 1
    assert run(["dims"], capsys)[0] == 1
    assert run(["dims", "--kmax", "x"], capsys)[0] == 1
    assert run(["lvalue", "--k", "12", "--d", "-3"], capsys)[0] == 1
    code, out, _ = run(["omega", "--k", "12", "--method", "series", "--x", "1"], capsys)
    assert code == 2
    assert json.loads(out.strip().splitlines()[-1])["error"] == "ArithmeticError"


def test_moments_rows(capsys):
    code, out, _ = run(["moments", "--kmin", "12", "--kmax", "18", "--csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["k"]) for r in rows] == [12, 14, 16, 18]
    assert rows[0]["status"] == "ok" and float(rows[0]["value"]) > 0
    assert rows[1]["status"].startswith("parity mismatch")


def test_resonator_identity_and_diagonal(capsys):
    code, out, _ = run(["resonator-identity", "--n", "60", "--trials", "5", "--seed", "3", "--json"], capsys)
    assert code == 0
    assert all(json.loads(l)["passed"] for l in out.strip().splitlines())
    code, out, _ = run(["diagonal-check", "--n", "20", "--json"], capsys)
    assert code == 0 and json.loads(out)["passed"]
    assert run(["diagonal-check", "--n", "200"], capsys)[0] == 1


def test_determinism(tmp_path):
    cmd = [sys.executable, "-m", "lvalues", "resonator-identity", "--n", "80", "--trials", "6", "--seed", "11",
           "--cache-dir", str(tmp_path)]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
    cmd = [sys.executable, "-m", "lvalues", "moments", "--kmin", "24", "--kmax", "28", "--kstep", "4",
           "--cache-dir", str(tmp_path)]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b


def test_waldspurger_cli(capsys):
    code, out, _ = run(["waldspurger", "--k", "12", "--d1", "5", "--d2", "13", "--json"], capsys)
    assert code == 0
    rec = json.loads(out.strip().splitlines()[0])
    assert float(rec["residual"]) <= 1e-6 and "convention" in rec
