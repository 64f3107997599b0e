import json
import subprocess
import sys
import time

import pytest

from stacksort import cli, engine
from stacksort.cli import HISTORICAL, RunConfig, main, make_config
from stacksort.diffapprox import make_test_series
from stacksort.series import CoefficientSeries, read_series, write_series


@pytest.fixture(scope="module")
def w40(tmp_path_factory):
    out = tmp_path_factory.mktemp("w40")
    assert main(["compute", "--n", "40", "-o", str(out)]) == 0
    return out / "w3_N40.txt"


def test_compute_small(tmp_path):
    assert main(["compute", "--n", "13", "-o", str(tmp_path)]) == 0
    s = read_series(tmp_path / "w3_N13.txt")
    assert s.coeffs == HISTORICAL and s.provenance == "exact-certified"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["version"] and len(man["config_hash"]) == 16
    assert man["certification"]["passed"]


def test_compute_single_term(tmp_path):
    assert main(["compute", "--n", "1", "-o", str(tmp_path)]) == 0
    lines = (tmp_path / "w3_N1.txt").read_text().splitlines()
    assert lines[1:] == ["1 1"]


def test_verify_quick_mode(capsys):
    t0 = time.perf_counter()
    assert main(["verify", "--cap", "4"]) == 0
    assert time.perf_counter() - t0 < 5
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_verify_rejects_corrupted_file(tmp_path, capsys):
    bad = list(HISTORICAL)
    bad[6] += 1
    path = write_series(CoefficientSeries("w", bad, "exact-certified"), tmp_path / "bad.txt")
    assert main(["verify", "--cap", "4", "--coeffs", str(path)]) == cli.EXIT_INVARIANT
    assert "FAIL" in capsys.readouterr().out


def test_exit_codes(tmp_path, monkeypatch, capsys):
    with pytest.raises(SystemExit) as e:
        main(["compute"])                      # --n missing
    assert e.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == cli.EXIT_USAGE
    assert main(["compute", "--n", "200", "--memory-budget", "1000",
                 "-o", str(tmp_path)]) == cli.EXIT_RESOURCE
    assert main(["bounds", str(tmp_path / "missing.txt")]) == cli.EXIT_USAGE

    real = engine.compute_series

    def failing(*a, **k):
        res = real(*a, **k)
        res.report.passed = False
        return res
    monkeypatch.setattr(engine, "compute_series", failing)
    assert main(["compute", "--n", "5", "-o", str(tmp_path)]) == cli.EXIT_CERT
    assert "certification FAILED" in capsys.readouterr().err


def test_env_overrides_and_flags_win(monkeypatch):
    monkeypatch.setenv("STACKSORT_THREADS", "3")
    monkeypatch.setenv("STACKSORT_PRECISION", "70")
    p = cli.build_parser()
    cfg = make_config(p.parse_args(["compute", "--n", "5"]), 5)
    assert (cfg.threads, cfg.precision_digits) == (3, 70)
    cfg = make_config(p.parse_args(["compute", "--n", "5", "--threads", "2",
                                    "--precision", "40"]), 5)
    assert (cfg.threads, cfg.precision_digits) == (2, 40)
    with pytest.raises(ValueError):
        RunConfig(N=0)
    with pytest.raises(ValueError):
        RunConfig(N=5, precision_digits=10)


def test_config_hash_is_stable():
    assert RunConfig(N=5).digest() == RunConfig(N=5).digest()
    assert RunConfig(N=5).digest() != RunConfig(N=6).digest()


def test_bounds_command(w40, tmp_path, capsys):
    assert main(["bounds", str(w40), "-o", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["rigorous"] and rep["root"]["N_used"] == 40
    assert float(rep["indecomposable"]["bound_value"]) > float(rep["root"]["bound_value"])
    assert (tmp_path / "bounds_manifest.json").exists()


def test_export_plot_is_deterministic(w40, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["export-plot", str(w40), "--mu", "9.81", "-o", str(a)]) == 0
    assert main(["export-plot", str(w40), "--mu", "9.81", "-o", str(b)]) == 0
    names = sorted(p.name for p in a.glob("*.csv"))
    assert "ratios.csv" in names and "g.csv" in names and len(names) == 11
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_analyze_catalan(tmp_path, capsys):
    path = write_series(CoefficientSeries("catalan", make_test_series("catalan", 41)[1:]),
                        tmp_path / "cat.txt")
    out = tmp_path / "out"
    assert main(["analyze", str(path), "--orders", "1,2", "--prefixes", "40",
                 "-o", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert abs(float(summary["x_c"]) - 0.25) < 1e-12
    rep = json.loads((out / "singularities.json").read_text())
    assert {r["order"] for r in rep["singularities"]} == {1, 2}
    assert (out / "estimators" / "ratios.csv").exists()


def test_extend_small(w40, tmp_path):
    out = tmp_path / "ext"
    assert main(["extend", str(w40), "--target", "45", "--order", "3", "-o", str(out)]) == 0
    ext = read_series(out / "w3_N40_extended_45.txt")
    assert ext.provenance == "approximate" and ext.N == 45
    exact = read_series(w40).coeffs
    assert ext.coeffs[:40] == exact
    man = json.loads((out / "extend_manifest.json").read_text())
    assert man["reached"] == 45 and man["config"]["N"] == 45 and man["min_declared_digits"] > 5


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "stacksort", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "stacksort" in r.stdout
