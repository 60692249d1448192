import csv
import json
import os

import numpy as np
import pytest

from sdc_dae.cli import main


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_run_mode(tmp_path):
    out = tmp_path / "run.csv"
    rc = main(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
               "--qdelta", "lu", "--M", "6", "--dt", "0.1", "--t-end", "1.0",
               "--e-tol", "1e-12", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert len(rows) == 10
    assert list(rows[0]) == ["step", "t", "err_y", "err_z", "iterations",
                             "max_g_residual", "wallclock_s"]
    assert float(rows[-1]["t"]) == pytest.approx(1.0)
    assert float(rows[-1]["err_y"]) <= 1e-10
    meta = json.loads((tmp_path / "run.csv.meta.json").read_text())
    assert meta["config"]["problem"] == "linear"
    assert "version" in meta and "wallclock_s" in meta


def test_seventeen_digit_floats(tmp_path):
    out = tmp_path / "r.csv"
    main(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
          "--qdelta", "lu", "--M", "3", "--dt", "0.5", "--t-end", "0.5",
          "--out", str(out)])
    line = out.read_text().splitlines()[1]
    t_field = line.split(",")[1]
    assert "e" in t_field
    mantissa = t_field.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 17
    assert float(t_field) == 0.5  # round-trip exact


def test_order_study_mode(tmp_path):
    out = tmp_path / "ord.csv"
    rc = main(["--mode", "order-study", "--problem", "linear", "--variant",
               "sdc-c", "--qdelta", "min-sr-ns", "--M", "3",
               "--dt", "0.125,0.0625,0.03125,0.015625", "--k", "0,1",
               "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["variable", "k", "dt", "error", "slope"]
    assert {r["variable"] for r in rows} == {"y", "z"}
    k0 = [r for r in rows if r["k"] == "0" and r["variable"] == "y"]
    assert abs(float(k0[0]["slope"]) - 1.0) <= 0.3


def test_spectrum_mode(tmp_path):
    out = tmp_path / "spec.csv"
    rc = main(["--mode", "spectrum", "--problem", "linear", "--qdelta",
               "min-sr-s", "--M", "6", "--dt", "0.01", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["re", "im", "rho"]
    assert len(rows) == 12  # M * n eigenvalues
    rho = float(rows[0]["rho"])
    assert rho == pytest.approx(max(np.hypot(float(r["re"]), float(r["im"]))
                                    for r in rows), rel=1e-12)


def test_constraint_history_mode(tmp_path):
    out = tmp_path / "hist.csv"
    rc = main(["--mode", "constraint-history", "--problem", "linear",
               "--variant", "si-sdc", "--qdelta", "ie", "--M", "4",
               "--dt", "0.1", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["k", "increment", "max_g_residual", "error"]
    g = [float(r["max_g_residual"]) for r in rows]
    assert g[0] > g[-1]


def test_missing_dt_is_config_error(tmp_path):
    rc = main(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
               "--qdelta", "lu", "--M", "3", "--t-end", "1.0",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_unknown_problem_lists_valid_names(tmp_path, capsys):
    rc = main(["--mode", "run", "--problem", "nope", "--variant", "sdc-c",
               "--qdelta", "lu", "--M", "3", "--dt", "0.1", "--t-end", "1.0",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "linear" in err and "reaction-diffusion" in err


def test_solver_failure_exit_code(tmp_path):
    rc = main(["--mode", "run", "--problem", "linear", "--variant", "fi-sdc",
               "--qdelta", "picard", "--M", "3", "--dt", "0.1",
               "--t-end", "0.1", "--out", str(tmp_path / "x.csv")])
    assert rc == 3


def test_invalid_m_rejected(tmp_path):
    rc = main(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
               "--qdelta", "lu", "--M", "13", "--dt", "0.1", "--t-end", "1.0",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "c.csv"
    cfg.write_text(json.dumps({"mode": "run", "problem": "linear",
                               "variant": "sdc-c", "qdelta": "lu", "M": 3,
                               "dt": 0.25, "t_end": 0.5, "out": str(out)}))
    assert main(["--config", str(cfg)]) == 0
    assert len(read_csv(out)) == 2


def test_explicit_flag_beats_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "d.csv"
    cfg.write_text(json.dumps({"mode": "run", "problem": "linear",
                               "variant": "sdc-c", "qdelta": "lu", "M": 3,
                               "dt": 0.25, "t_end": 0.5, "out": "ignored.csv"}))
    assert main(["--config", str(cfg), "--out", str(out)]) == 0
    assert out.exists()


def test_rerun_determinism(tmp_path):
    args = ["--mode", "spectrum", "--problem", "linear", "--qdelta",
            "min-sr-ns", "--M", "6", "--dt", "0.01", "--seed", "0"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_run_determinism_modulo_timing(tmp_path):
    args = ["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
            "--qdelta", "min-sr-s", "--M", "6", "--dt", "0.1",
            "--t-end", "0.5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    strip = lambda p: ["\x1f".join(line.split(",")[:-1])
                       for line in p.read_text().splitlines()]
    assert strip(a) == strip(b)


def test_coeffs_file_flag(tmp_path):
    coeffs = tmp_path / "coeffs.json"
    coeffs.write_text(json.dumps({"M": 3, "family": "radau-right",
                                  "kind": "MIN-SR-S",
                                  "diagonal": [0.2, 0.3, 0.4]}))
    out = tmp_path / "s.csv"
    rc = main(["--mode", "spectrum", "--problem", "linear", "--qdelta",
               "min-sr-s", "--M", "3", "--dt", "0.01", "--coeffs", str(coeffs),
               "--out", str(out)])
    assert rc == 0


def test_env_threads_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("DAE_SDC_THREADS", "2")
    out = tmp_path / "t.csv"
    rc = main(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
               "--qdelta", "min-sr-s", "--M", "4", "--dt", "0.25",
               "--t-end", "0.5", "--out", str(out)])
    assert rc == 0
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert meta["config"]["threads"] == 2


def test_unknown_flag_rejected(tmp_path):
    rc = main(["--mode", "run", "--frobnicate", "1"])
    assert rc == 2
