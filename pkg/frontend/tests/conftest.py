import subprocess
import sys

import pytest


def _emit(args, out):
    cmd = [sys.executable, "-m", "sdc_dae.cli"] + args + ["--out", str(out)]
    subprocess.run(cmd, check=True)
    return str(out)


@pytest.fixture(scope="session")
def spectrum_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("csv")
    return _emit(["--mode", "spectrum", "--problem", "linear", "--qdelta",
                  "min-sr-ns", "--M", "6", "--dt", "0.01"], d / "spectrum.csv")


@pytest.fixture(scope="session")
def order_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("csv")
    return _emit(["--mode", "order-study", "--problem", "linear", "--variant",
                  "sdc-c", "--qdelta", "min-sr-ns", "--M", "3",
                  "--dt", "0.125,0.0625,0.03125,0.015625", "--k", "0,1,2"],
                 d / "order.csv")


@pytest.fixture(scope="session")
def run_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("csv")
    return _emit(["--mode", "run", "--problem", "linear", "--variant", "sdc-c",
                  "--qdelta", "lu", "--M", "4", "--dt", "0.1",
                  "--t-end", "1.0"], d / "run.csv")


@pytest.fixture(scope="session")
def history_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("csv")
    return _emit(["--mode", "constraint-history", "--problem", "linear",
                  "--variant", "si-sdc", "--qdelta", "ie", "--M", "4",
                  "--dt", "0.1"], d / "history.csv")
