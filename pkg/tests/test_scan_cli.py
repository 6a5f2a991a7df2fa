import json
import math

import numpy as np
import pytest

from expdyn import cli
from expdyn.classify import CASE_CODES, classify_lambda
from expdyn.errors import ScanLimitError
from expdyn.scan import DYNAMICAL, ScanJob, coordinates, run_scan


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text,value", [
    ("1", 1), ("-2.5", -2.5), ("3i", 3j), ("-i", -1j), ("i", 1j), ("3+1i", 3 + 1j),
    ("1e-3-2.5i", 1e-3 - 2.5j), (" 0.5 + 2j ", 0.5 + 2j), (".5-.25i", 0.5 - 0.25j)])
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


@pytest.mark.parametrize("text", ["x", "", "1+", "i2", "1.2.3", "1+2", "--1"])
def test_parse_complex_rejects(text):
    with pytest.raises(Exception):
        cli.parse_complex(text)


def test_orbit_command(capsys):
    code, out, _ = run(capsys, "orbit", "--lambda", "1", "--seed", "0", "-n", "10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ") and "status=escaped" in lines[0]
    assert lines[1] == "n,logmod_z,arg_z,logmod_dlog,arg_dlog"
    assert float(lines[3].split(",")[1]) == 0.0          # f(0) = 1
    assert float(lines[4].split(",")[1]) == 1.0          # f^2(0) = e
    code, out, _ = run(capsys, "orbit", "--lambda", "-1", "--seed", "0", "-n", "200")
    assert "status=converged" in out.splitlines()[0]


def test_orbit_bad_lambda(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["orbit", "--lambda", "x"])
    assert exc.value.code == 2
    assert "a+bi" in capsys.readouterr().err


def test_io_failure(capsys):
    code, _, _ = run(capsys, "orbit", "--lambda", "1", "-o", "/nonexistent/dir/o.csv")
    assert code == 3


def test_verify_commands(capsys):
    assert run(capsys, "verify", "prop2")[0] == 0
    assert run(capsys, "verify", "prop2", "--K", "10")[0] == 0
    assert run(capsys, "verify", "mobius", "--lambda", "1", "--y", "3+1i", "-n", "12")[0] == 0
    code, out, _ = run(capsys, "verify", "all")
    assert code == 0 and out.count("ok") >= 4


def test_verify_failure_exit(capsys, monkeypatch):
    from expdyn import verify
    orig = verify.mobius
    monkeypatch.setattr(verify, "mobius", lambda *a, **k: orig(*a, tol=0.0, **k))
    code, out, _ = run(capsys, "verify", "mobius")
    assert code == 1 and "worst" in out


def test_series_and_bseries_csv(capsys):
    code, out, _ = run(capsys, "series", "--lambda", "1", "-n", "10")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# kind=poincare")
    assert float(lines[-1].split(",")[5]) == pytest.approx(2.3921550892866, abs=1e-12)
    code, out, _ = run(capsys, "bseries", "--lambda", "1", "-n", "6", "--format", "json")
    js = json.loads(out)
    assert js["value"][0] == pytest.approx(1.3921550892866, abs=1e-12)


def test_ruelle_eval(capsys):
    code, out, _ = run(capsys, "ruelle-eval", "--lambda", "1", "--a", "2", "--z", "3")
    js = json.loads(out)
    ev = js["evaluations"][0]
    assert code == 0 and ev["closed_form"][0] == pytest.approx(-2.2757109925118297)
    assert ev["abs_difference"] < 1e-6


def test_classify_command(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "0.2", "--horizon", "100")
    js = json.loads(out)
    assert code == 0 and js["case"] == "DerivativeToZero" and js["horizon"] == 100


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("horizon = 60\n")
    code, out, _ = run(capsys, "--config", str(cfg), "classify", "--lambda", "1")
    assert code == 0 and json.loads(out)["horizon"] == 60
    code, out, _ = run(capsys, "--config", str(cfg), "classify", "--lambda", "1",
                       "--horizon", "80")
    assert json.loads(out)["horizon"] == 80
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "--config", str(cfg), "classify", "--lambda", "1")[0] == 2
    assert run(capsys, "--config", str(tmp_path / "missing.cfg"), "classify",
               "--lambda", "1")[0] == 3


def test_scan_single_pixel(tmp_path, capsys):
    img = tmp_path / "one.ppm"
    code, _, _ = run(capsys, "scan", "--region=0.5,1.5,-0.5,0.5", "--size", "1x1",
                     "-o", str(img))
    assert code == 0
    data = img.read_bytes()
    assert data.startswith(b"P6\n1 1\n255\n") and len(data) == len(b"P6\n1 1\n255\n") + 3
    lines = (tmp_path / "one.csv").read_text().splitlines()
    assert lines[0].startswith("# mode=param-classify") and "horizon=200" in lines[0]
    assert lines[1] == "row,col,re,im,case_code"
    assert lines[2] == f"0,0,1.0,0.0,{CASE_CODES['SubseqToInfinity']}"


def test_scan_limits(tmp_path, capsys):
    img = str(tmp_path / "x.ppm")
    assert run(capsys, "scan", "--region=1,1,0,1", "--size", "2x2", "-o", img)[0] == 4
    assert run(capsys, "scan", "--region=0,1,0,1", "--size", "3000x3000", "-o", img)[0] == 4
    with pytest.raises(ScanLimitError):
        run_scan(ScanJob((0, 1, 0, 1), 10, 10, max_pixels=99))


def test_scan_geometry():
    job = ScanJob((-2, 2, -1, 1), 4, 2)
    c = coordinates(job)
    assert c[0, 0] == complex(-1.5, 0.5) and c[1, 3] == complex(1.5, -0.5)


def test_real_strip_transition():
    res = run_scan(ScanJob((-3, 3, -0.01, 0.01), 600, 4))
    re = res.coords[1].real
    row = res.codes[1]
    pos = (re > 0) & (re < 0.37)
    assert np.all(row[pos] == CASE_CODES["DerivativeToZero"])
    assert row[np.argmin(abs(re - 1.0))] == CASE_CODES["SubseqToInfinity"]


def test_scan_matches_classify():
    job = ScanJob((-2.5, 1.5, -1.5, 1.5), 12, 9, horizon=120)
    res = run_scan(job)
    for i in range(0, 9, 2):
        for j in range(0, 12, 3):
            lam = res.coords[i, j]
            assert res.codes[i, j] == CASE_CODES[classify_lambda(lam, 120).case], lam


def test_scan_worker_independence():
    job = ScanJob((-3.5, 1.5, -2.5, 2.5), 40, 30)
    a = run_scan(job, 1)
    b = run_scan(job, 3)
    assert a.ppm_bytes() == b.ppm_bytes() and a.csv_text() == b.csv_text()


def test_dynamical_mode():
    res = run_scan(ScanJob((-2, 4, -3, 3), 30, 30, DYNAMICAL, 50, 1))
    assert res.codes.max() > 0
    ppm = res.ppm_bytes()
    assert ppm.startswith(b"P6\n30 30\n255\n")


def test_threads_env(monkeypatch):
    from expdyn.scan import worker_count
    monkeypatch.setenv("EXPDYN_THREADS", "2")
    assert worker_count(8) == 2
    monkeypatch.delenv("EXPDYN_THREADS")
    assert worker_count(3) == 3


def test_wscan_and_prop1scan(capsys):
    code, out, _ = run(capsys, "wscan", "--region=-1.2,1.2,-0.2,0.2", "--size", "4x1",
                       "--horizon", "60")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# ")
    assert lines[1] == "re_lambda,im_lambda,case_code,summable,min_dist,re_S_tail,im_S_tail"
    assert len(lines) == 6
    code, out, err = run(capsys, "prop1scan", "--start", "-1", "--stop", "1", "--step", "0.5")
    assert code == 0 and "flags: 0" in err and len(out.splitlines()) == 2 + 5
