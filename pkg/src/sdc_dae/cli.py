"""Benchmark command-line driver.

Modes:
  run                 time-loop integration, one CSV row per step
  order-study         single-step error vs dt for fixed sweep counts
  spectrum            eigenvalues of the linear-case iteration matrix
  constraint-history  per-sweep increment / constraint-residual history

Every run writes a CSV plus a JSON metadata sidecar (config echo, version,
wall-clock). Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .analysis import iteration_matrix_linear, order_study
from .linalg import EigenConvergenceError, SingularMatrixError
from .collocation import make_qdelta, make_radau_nodes, QDELTA_KINDS
from .problems import PROBLEM_REGISTRY, make_problem
from .sdc_core import (IntegrateConfig, StepController, StepFailure, VARIANTS,
                       default_thread_count, integrate, run_step)

_QDELTA_FLAG = {"ie": "IE", "ee": "EE", "picard": "Picard", "lu": "LU",
                "min-sr-s": "MIN-SR-S", "min-sr-ns": "MIN-SR-NS"}

RUN_SCHEMA = ["step", "t", "err_y", "err_z", "iterations", "max_g_residual", "wallclock_s"]
ORDER_SCHEMA = ["variable", "k", "dt", "error", "slope"]
SPECTRUM_SCHEMA = ["re", "im", "rho"]
HISTORY_SCHEMA = ["k", "increment", "max_g_residual", "error"]


class ConfigError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        # 17 significant digits: round-trip exact for IEEE doubles
        return format(value, ".16e")
    return str(value)


def emit_csv(records, schema, path):
    """UTF-8 CSV, header row, 17-significant-digit scientific floats."""
    lines = [",".join(schema)]
    for rec in records:
        lines.append(",".join(_fmt(rec[col]) for col in schema))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_sidecar(path, config, wallclock):
    meta = {"config": config, "version": __version__, "wallclock_s": wallclock}
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdc-dae", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--mode", choices=["run", "order-study", "spectrum", "constraint-history"])
    parser.add_argument("--config", help="JSON file with flag values (flag names without --)")
    parser.add_argument("--problem")
    parser.add_argument("--variant", choices=list(VARIANTS))
    parser.add_argument("--qdelta", choices=sorted(_QDELTA_FLAG))
    parser.add_argument("--M", type=int)
    parser.add_argument("--dt", help="time step; comma list in order-study mode")
    parser.add_argument("--t-end", type=float, dest="t_end")
    parser.add_argument("--e-tol", type=float, dest="e_tol", default=1e-12)
    parser.add_argument("--k-max", type=int, dest="k_max", default=100)
    parser.add_argument("--k", help="fixed sweep counts (comma list, order-study mode)")
    parser.add_argument("--newton-tol", type=float, dest="newton_tol", default=1e-13)
    parser.add_argument("--newton-coupled", dest="newton_coupled",
                        help="ref_tol,ref_dt for the step-size-coupled Newton tolerance")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--grid-size", type=int, dest="grid_size", default=256,
                        help="spatial grid for the reaction-diffusion problem")
    parser.add_argument("--out", default="out.csv")
    parser.add_argument("--coeffs", help="JSON coefficients file for MIN-SR kinds")
    parser.add_argument("--seed", type=int, default=0)
    return parser


def _load_config_file(argv):
    # --config supplies defaults; explicit flags are not overridden
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    with open(argv[idx + 1], encoding="utf-8") as fh:
        data = json.load(fh)
    extra = []
    for key, value in data.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        extra.extend([flag, str(value)])
    return argv + extra


def _controller(args) -> StepController:
    ctrl = StepController(e_tol=args.e_tol, k_max=args.k_max, newton_tol=args.newton_tol)
    if args.newton_coupled:
        try:
            ref_tol, ref_dt = (float(v) for v in args.newton_coupled.split(","))
        except ValueError as exc:
            raise ConfigError("--newton-coupled expects 'ref_tol,ref_dt'") from exc
        ctrl.newton_policy = "coupled"
        ctrl.newton_tol_ref = ref_tol
        ctrl.dt_ref = ref_dt
    return ctrl


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required in {args.mode} mode")


def _make_problem(args):
    if args.problem not in PROBLEM_REGISTRY:
        raise ConfigError(f"unknown problem {args.problem!r}; "
                          f"valid: {', '.join(sorted(PROBLEM_REGISTRY))}")
    if args.problem == "reaction-diffusion":
        return make_problem(args.problem, n=args.grid_size)
    return make_problem(args.problem)


def _qdelta_kind(args):
    if args.qdelta is None:
        raise ConfigError("--qdelta is required; valid: " + ", ".join(sorted(_QDELTA_FLAG)))
    return _QDELTA_FLAG[args.qdelta]


def _mode_run(args):
    _require(args, "problem", "variant", "M", "dt", "t_end")
    problem = _make_problem(args)
    config = IntegrateConfig(t_end=args.t_end, dt=float(args.dt), M=args.M,
                             qdelta_kind=_qdelta_kind(args), variant=args.variant,
                             controller=_controller(args), threads=args.threads,
                             seed=args.seed, coefficients_file=args.coeffs)
    records = integrate(problem, config)
    rows = []
    for i, rec in enumerate(records):
        rows.append({"step": i, "t": rec.t_end, "err_y": rec.err_y, "err_z": rec.err_z,
                     "iterations": rec.sweeps,
                     "max_g_residual": max(rec.g_residuals) if rec.g_residuals else float("nan"),
                     "wallclock_s": rec.wallclock_s})
    emit_csv(rows, RUN_SCHEMA, args.out)


def _mode_order_study(args):
    _require(args, "problem", "variant", "M", "dt", "k")
    problem = _make_problem(args)
    dts = [float(v) for v in str(args.dt).split(",")]
    ks = [int(v) for v in str(args.k).split(",")]
    estimates = order_study(problem, args.variant, _qdelta_kind(args), args.M, dts, ks,
                            newton_tol=args.newton_tol, seed=args.seed)
    rows = []
    for est in estimates:
        for dt, err in zip(est.dt_samples, est.error_samples):
            rows.append({"variable": est.variable, "k": est.k, "dt": float(dt),
                         "error": float(err), "slope": est.slope})
    emit_csv(rows, ORDER_SCHEMA, args.out)


def _mode_spectrum(args):
    _require(args, "problem", "M", "dt")
    problem = _make_problem(args)
    if not problem.linear_flag:
        raise ConfigError("spectrum mode needs a linear problem")
    dt = float(args.dt)
    scheme = make_radau_nodes(args.M, problem.t0, problem.t0 + dt)
    qdelta = make_qdelta(_qdelta_kind(args), scheme, seed=args.seed,
                         coefficients_file=args.coeffs)
    report = iteration_matrix_linear(problem, scheme, qdelta)
    rho = report.spectrum.spectral_radius
    rows = [{"re": float(ev.real), "im": float(ev.imag), "rho": rho}
            for ev in report.spectrum.eigenvalues]
    emit_csv(rows, SPECTRUM_SCHEMA, args.out)


def _mode_constraint_history(args):
    _require(args, "problem", "variant", "M", "dt")
    problem = _make_problem(args)
    dt = float(args.dt)
    scheme = make_radau_nodes(args.M, problem.t0, problem.t0 + dt)
    qdelta = make_qdelta(_qdelta_kind(args), scheme, seed=args.seed,
                         coefficients_file=args.coeffs)
    y0, z0 = problem.initial_values()
    record = run_step(problem, scheme, qdelta, args.variant, _controller(args), y0, z0,
                      threads=args.threads or 1, exact=problem.exact_solution(scheme.t1))
    rows = []
    for k in range(len(record.increments)):
        rows.append({"k": k + 1, "increment": record.increments[k],
                     "max_g_residual": record.g_residuals[k],
                     "error": record.errors[k] if record.errors else float("nan")})
    emit_csv(rows, HISTORY_SCHEMA, args.out)


_MODES = {"run": _mode_run, "order-study": _mode_order_study,
          "spectrum": _mode_spectrum, "constraint-history": _mode_constraint_history}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _load_config_file(argv)
        args, unknown = parser.parse_known_args(argv)
        if unknown:
            raise ConfigError(f"unknown arguments: {' '.join(unknown)}")
        if args.mode is None:
            raise ConfigError("--mode is required (run, order-study, spectrum, constraint-history)")
        if args.threads is None:
            args.threads = default_thread_count()
        if args.dt is not None and any(float(v) <= 0 for v in str(args.dt).split(",")):
            raise ConfigError("--dt values must be positive")
        if args.M is not None and not 1 <= args.M <= 12:
            raise ConfigError("--M must lie in [1, 12]")
        start = time.perf_counter()
        _MODES[args.mode](args)
        _write_sidecar(args.out, {k: v for k, v in vars(args).items() if k != "config"},
                       time.perf_counter() - start)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (StepFailure, SingularMatrixError, EigenConvergenceError, OSError,
            RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
