"""Deterministic CSV/JSON emission of run reports and figure data.

Floats are written with ``repr`` so identical inputs give byte-identical
files. Wall-clock information goes only to ``metadata.json``.
"""

from __future__ import annotations

import csv
import json
import platform
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import dump_config
from .dsft import BeamResponseGrid, beam_response, mu_grid
from .errors import StageNotRunError
from .pipeline import RunReport

FIGURES = ("beam", "roots", "learning", "deviation")

TRIAL_COLUMNS = [
    "trial",
    "status",
    "error",
    "true_angles_deg",
    "est_angles_deg",
    "model_order",
    "doa_abs_errors_deg",
    "mean_abs_doa_error_deg",
    "final_mse",
    "converged_iteration",
    "ascent_mode_response",
    "ascent_angles_deg",
    "analytic_angles_deg",
    "avg_output_modulus",
    "avg_cost",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")
    return path


def write_report(report: RunReport, out_dir, fmt: str | None = None) -> list[Path]:
    """Per-trial records plus the aggregate summary, as CSV or JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = fmt or report.config.output_format
    records = report.records
    written = [(out / "config.cfg")]
    written[0].write_text(dump_config(report.config))
    if fmt == "json":
        written.append(_write_json(out / "trials.json", [{k: r[k] for k in TRIAL_COLUMNS} for r in records]))
        written.append(_write_json(out / "summary.json", report.summary))
    elif fmt == "csv":
        rows = [[_cell(r[k]) for k in TRIAL_COLUMNS] for r in records]
        written.append(_write_csv(out / "trials.csv", TRIAL_COLUMNS, rows))
        written.append(
            _write_csv(out / "summary.csv", ["statistic", "value"], [[k, _cell(v)] for k, v in report.summary.items()])
        )
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return written


def write_metadata(out_dir, command: str) -> Path:
    meta = {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return _write_json(Path(out_dir) / "metadata.json", meta)


def _first_trial_with(report: RunReport, *keys):
    for t in report.trials:
        if all(k in t.artifacts for k in keys):
            return t
    return None


def emit_figure_data(report: RunReport, which: str, out_dir) -> list[Path]:
    """Write the CSV behind one figure type for the first trial that has it.

    ``beam``: preprocessor (and ascent, if run) beam responses on a
    1024-point grid. ``roots``: polynomial roots with scores and flags.
    ``deviation``: ``|z_m| - 1`` per root. ``learning``: preprocessor MSE
    curve and, if run, the CMA modulus/cost curve.
    """
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; choose from {FIGURES}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ratio = report.config.scenario.geometry.spacing_ratio
    written = []
    if which == "beam":
        grid = mu_grid()
        for key, name in (("u", "beam.csv"), ("v", "beam_ascent.csv")):
            t = _first_trial_with(report, key)
            if t is not None:
                w = t.artifacts[key]
                BeamResponseGrid(grid, beam_response(w, grid), w, ratio).to_csv(out / name)
                written.append(out / name)
    elif which in ("roots", "deviation"):
        for key, suffix in (("roots", ""), ("ascent_roots", "_ascent")):
            t = _first_trial_with(report, key)
            if t is None:
                continue
            rs = t.artifacts[key]
            if which == "roots":
                rs.to_csv(out / f"roots{suffix}.csv")
                written.append(out / f"roots{suffix}.csv")
            else:
                rows = [[i, repr(float(d))] for i, d in enumerate(rs.unit_distance)]
                written.append(_write_csv(out / f"deviation{suffix}.csv", ["root", "abs_minus_1"], rows))
    else:
        t = _first_trial_with(report, "mse_history")
        if t is not None:
            rows = [[i, repr(float(m))] for i, m in enumerate(t.artifacts["mse_history"])]
            written.append(_write_csv(out / "learning.csv", ["iteration", "mse"], rows))
        t = _first_trial_with(report, "cma_moduli", "cma_costs")
        if t is not None:
            rows = [
                [i, repr(float(m)), repr(float(c))]
                for i, (m, c) in enumerate(zip(t.artifacts["cma_moduli"], t.artifacts["cma_costs"]))
            ]
            written.append(_write_csv(out / "cma_learning.csv", ["iteration", "abs_y", "cost"], rows))
    if not written:
        raise StageNotRunError(f"no trial produced data for the {which!r} figure")
    return written


def write_weights(path, weights) -> Path:
    rows = [[i, repr(float(w.real)), repr(float(w.imag))] for i, w in enumerate(np.asarray(weights))]
    return _write_csv(Path(path), ["index", "re", "im"], rows)


def write_snapshots(path, X, fmt: str = "csv") -> Path:
    X = np.asarray(X)
    path = Path(path)
    if fmt == "json":
        obj = {
            "num_elements": X.shape[0],
            "num_snapshots": X.shape[1],
            "re": [[float(v) for v in row] for row in X.real],
            "im": [[float(v) for v in row] for row in X.imag],
        }
        return _write_json(path, obj)
    rows = (
        [m, n, repr(float(X[m, n].real)), repr(float(X[m, n].imag))]
        for m in range(X.shape[0])
        for n in range(X.shape[1])
    )
    return _write_csv(path, ["element", "snapshot", "re", "im"], rows)
