"""Figure rendering over the benchmark CSV schemas.

Four figure kinds are supported, each keyed to a CSV header (schema is the
header contract, not the file name):

  spectrum        re,im,rho                     eigenvalue scatter
  order           variable,k,dt,error,slope     log-log panels per variable
  work-precision  step,...,wallclock_s          error vs accumulated time
  iterations      k,increment,max_g_residual,.. per-sweep history curves

Output is deterministic for identical inputs: fixed figure geometry, no
timestamps or randomized ids in the file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plots"

import matplotlib.pyplot as plt
import numpy as np

SCHEMAS = {
    "spectrum": ["re", "im", "rho"],
    "order": ["variable", "k", "dt", "error", "slope"],
    "work-precision": ["step", "t", "err_y", "err_z", "iterations",
                       "max_g_residual", "wallclock_s"],
    "iterations": ["k", "increment", "max_g_residual", "error"],
}

FIGSIZE = (6.4, 4.8)


class SchemaError(ValueError):
    """Input CSV does not carry the columns the figure kind needs."""

    def __init__(self, path, missing):
        self.path = str(path)
        self.missing = list(missing)
        super().__init__(f"{path}: missing columns: {', '.join(self.missing)}")


@dataclass
class FigureSpec:
    kind: str
    inputs: list[str]
    output: str
    reference_slopes: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"valid: {', '.join(sorted(SCHEMAS))}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def load_table(path, kind):
    """Rows of one CSV, header-validated against the kind's schema."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in SCHEMAS[kind] if c not in header]
        if missing:
            raise SchemaError(path, missing)
        rows = list(reader)
    if not rows:
        raise SchemaError(path, ["<no data rows>"])
    return rows


def _column(rows, name):
    return np.array([float(r[name]) for r in rows])


def _save(fig, output):
    fig.savefig(output, metadata={"Date": None} if str(output).endswith(".svg")
                else None)
    plt.close(fig)


def _render_spectrum(spec):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), "k--", lw=0.8, label="unit circle")
    for path in spec.inputs:
        rows = load_table(path, "spectrum")
        re, im = _column(rows, "re"), _column(rows, "im")
        rho = float(rows[0]["rho"])
        ax.scatter(re, im, s=18, label=f"{Path(path).stem} (rho={rho:.2e})")
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.axvline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, spec.output)


def _render_order(spec):
    tables = [(Path(p).stem, load_table(p, "order")) for p in spec.inputs]
    variables = sorted({r["variable"] for _, rows in tables for r in rows})
    fig, axes = plt.subplots(1, len(variables), figsize=(FIGSIZE[0] * len(variables),
                                                         FIGSIZE[1]), squeeze=False)
    for ax, var in zip(axes[0], variables):
        dt_all = []
        for stem, rows in tables:
            sub = [r for r in rows if r["variable"] == var]
            for k in sorted({int(r["k"]) for r in sub}):
                grp = [r for r in sub if int(r["k"]) == k]
                dts, errs = _column(grp, "dt"), _column(grp, "error")
                order = np.argsort(dts)
                slope = float(grp[0]["slope"])
                label = f"{stem} k={k} (slope {slope:.2f})"
                ax.loglog(dts[order], errs[order], "o-", ms=4, label=label)
                dt_all.extend(dts)
        for slope in spec.reference_slopes:
            dts = np.array(sorted(set(dt_all)))
            anchor = ax.get_ylim()[0]
            ax.loglog(dts, anchor * (dts / dts.min()) ** slope, "k--", lw=0.8)
        ax.set_xlabel("dt")
        ax.set_ylabel("error")
        ax.set_title(var)
        ax.legend(fontsize=7)
    _save(fig, spec.output)


def _render_work_precision(spec):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path in spec.inputs:
        rows = load_table(path, "work-precision")
        work = float(np.sum(_column(rows, "wallclock_s")))
        err = float(np.max(np.maximum(_column(rows, "err_y"),
                                      _column(rows, "err_z"))))
        ax.loglog([work], [err], "o", label=Path(path).stem)
    ax.set_xlabel("wall-clock time [s]")
    ax.set_ylabel("max error")
    ax.legend(fontsize=8)
    _save(fig, spec.output)


def _render_iterations(spec):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path in spec.inputs:
        rows = load_table(path, "iterations")
        k = _column(rows, "k")
        stem = Path(path).stem
        ax.semilogy(k, np.maximum(_column(rows, "increment"), 1e-300),
                    "o-", ms=4, label=f"{stem} increment")
        ax.semilogy(k, np.maximum(_column(rows, "max_g_residual"), 1e-300),
                    "s--", ms=4, label=f"{stem} |g|")
    ax.set_xlabel("sweep k")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    _save(fig, spec.output)


_RENDERERS = {"spectrum": _render_spectrum, "order": _render_order,
              "work-precision": _render_work_precision,
              "iterations": _render_iterations}


def render(spec: FigureSpec) -> str:
    """Render the figure described by spec; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.output
