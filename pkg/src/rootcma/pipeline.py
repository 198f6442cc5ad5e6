"""Monte Carlo runner for the preconditioned CMA chain.

Per trial: synthesize -> LMS preprocessor -> prediction-error roots ->
model order -> DOA -> pseudoinverse steering -> optional CMA runs. Every
trial draws from its own (seed, trial) random stream, so results do not
depend on worker count or scheduling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .array_model import angular_frequency, synthesize
from .cma import run_ascent_normalized, run_descent_equalizer
from .config import ExperimentConfig
from .dsft import beam_response
from .errors import NumericError, RootCmaError
from .precond import run_preprocessor
from .roots import (
    analytic_roots_two_sources,
    build_polynomial,
    doa_from_roots,
    find_roots,
    precond_polynomial,
    reconstruct_and_precondition,
    root_angles,
    select_roots,
)

log = logging.getLogger(__name__)

STAGES = ("preprocess", "roots", "ascent", "cma")


def default_stages(cfg: ExperimentConfig) -> frozenset[str]:
    stages = set()
    if cfg.run_preprocessor:
        stages |= {"preprocess", "roots"}
    if cfg.run_ascent:
        stages.add("ascent")
    if cfg.run_cma_equalizer:
        stages.add("cma")
    return frozenset(stages)


@dataclass
class TrialRecord:
    """One trial's results; ``artifacts`` holds arrays kept out of the records."""

    trial: int
    status: str = "ok"
    error: str | None = None
    error_kind: str | None = None
    true_angles_deg: list = field(default_factory=list)
    est_angles_deg: list | None = None
    model_order: int | None = None
    doa_abs_errors_deg: list | None = None
    mean_abs_doa_error_deg: float | None = None
    final_mse: float | None = None
    converged_iteration: int | None = None
    ascent_mode_response: list | None = None
    ascent_angles_deg: list | None = None
    analytic_angles_deg: list | None = None
    avg_output_modulus: float | None = None
    avg_cost: float | None = None
    artifacts: dict = field(default_factory=dict, repr=False)

    def to_record(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "artifacts"}


@dataclass
class RunReport:
    config: ExperimentConfig
    stages: frozenset
    trials: list[TrialRecord]
    summary: dict = field(default_factory=dict)

    @property
    def records(self) -> list[dict]:
        return [t.to_record() for t in self.trials]


def match_angles(estimated: Iterable[float], truth: Iterable[float]) -> list[float]:
    """Absolute errors of the optimal one-to-one pairing (unmatched extras ignored)."""
    est = np.asarray(list(estimated), dtype=float)
    tru = np.asarray(list(truth), dtype=float)
    if est.size == 0 or tru.size == 0:
        return []
    cost = np.abs(est[:, None] - tru[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.argsort(cols)
    return [float(cost[r, c]) for r, c in zip(rows[order], cols[order])]


def _run_trial(cfg: ExperimentConfig, trial: int, stages: frozenset) -> TrialRecord:
    sc = cfg.scenario
    geo = sc.geometry
    M = geo.num_elements
    D = len(sc.sources)
    rec = TrialRecord(trial=trial, true_angles_deg=[float(a) for a in sc.angles_deg])
    try:
        X = synthesize(sc, trial)
        estimate = None
        if "preprocess" in stages:
            state = run_preprocessor(
                X, cfg.precond_gamma_mode, cfg.precond_iterations, gamma=cfg.precond_gamma
            )
            rec.final_mse = state.mse_history[-1] if state.mse_history else None
            rec.converged_iteration = state.converged_iteration()
            rec.artifacts["mse_history"] = np.asarray(state.mse_history)
            rec.artifacts["u"] = state.u
        if "roots" in stages:
            u = rec.artifacts["u"]
            rs = select_roots(
                find_roots(precond_polynomial(u)), u, cfg.selection_mode, cfg.selection_threshold
            )
            rec.artifacts["roots"] = rs
            angles = doa_from_roots(rs, geo)
            estimate = reconstruct_and_precondition(angles, geo)
            rec.artifacts["estimate"] = estimate
            rec.est_angles_deg = [float(a) for a in estimate.angles_deg]
            rec.model_order = rs.model_order
            rec.doa_abs_errors_deg = match_angles(rec.est_angles_deg, rec.true_angles_deg)
            rec.mean_abs_doa_error_deg = float(np.mean(rec.doa_abs_errors_deg))
        if "ascent" in stages:
            res = run_ascent_normalized(X, D, cfg.ascent_gamma, cfg.ascent_iterations)
            v = res.v
            rec.artifacts["v"] = v
            rec.artifacts["ascent_moduli"] = res.modulus_history
            mus = [angular_frequency(geo, a) for a in sc.angles_deg]
            rec.ascent_mode_response = [float(abs(beam_response(v, mu))) for mu in mus]
            rs_v = select_roots(
                find_roots(build_polynomial(v, M + D - 1)), v, "unit_distance", count=D
            )
            rec.artifacts["ascent_roots"] = rs_v
            rec.ascent_angles_deg = [float(a) for a in doa_from_roots(rs_v, geo)]
            if cfg.analytic_two_source:
                z = analytic_roots_two_sources(v[1])
                rec.analytic_angles_deg = sorted(float(a) for a in root_angles(z, geo))
        if "cma" in stages:
            init = None
            if cfg.cma_init == "pseudoinverse":
                if estimate is None or cfg.cma_source >= estimate.model_order:
                    raise RootCmaError("pseudoinverse initialisation needs a DOA estimate covering cma.source")
                init = estimate.steering_weights[:, cfg.cma_source]
            eq = run_descent_equalizer(X, cfg.cma_gamma, cfg.cma_iterations, init)
            rec.avg_output_modulus = eq.avg_output_modulus
            rec.avg_cost = eq.avg_cost
            rec.artifacts["cma_moduli"] = eq.modulus_history
            rec.artifacts["cma_costs"] = eq.cost_history
            rec.artifacts["cma_weights"] = eq.weights
    except RootCmaError as exc:
        rec.status = "error"
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.error_kind = "numeric" if isinstance(exc, NumericError) else "other"
        log.warning("trial %d failed: %s", trial, rec.error)
    return rec


def _percentile(values, q):
    return float(np.percentile(values, q)) if len(values) else None


def _mean(values):
    return float(np.mean(values)) if len(values) else None


def aggregate(records: list[dict], num_sources: int) -> dict:
    """Summary statistics, recomputable from the per-trial records alone."""
    ok = [r for r in records if r["status"] == "ok"]
    doa = [r["mean_abs_doa_error_deg"] for r in ok if r["mean_abs_doa_error_deg"] is not None]
    orders = [r["model_order"] for r in records if r["model_order"] is not None]
    moduli = [r["avg_output_modulus"] for r in ok if r["avg_output_modulus"] is not None]
    costs = [r["avg_cost"] for r in ok if r["avg_cost"] is not None]
    conv = [r["converged_iteration"] for r in ok if r["converged_iteration"] is not None]
    summary = {
        "num_trials": len(records),
        "num_failed": len(records) - len(ok),
        "mean_abs_doa_error_deg": _mean(doa),
        "median_abs_doa_error_deg": _percentile(doa, 50),
        "p90_abs_doa_error_deg": _percentile(doa, 90),
        "model_order_accuracy": (
            sum(o == num_sources for o in orders) / len(records) if orders else None
        ),
        "mean_avg_output_modulus": _mean(moduli),
        "mean_avg_cost": _mean(costs),
        "mean_converged_iteration": _mean(conv),
    }
    return summary


def run_pipeline(cfg: ExperimentConfig, stages: Iterable[str] | None = None) -> RunReport:
    stages = default_stages(cfg) if stages is None else frozenset(stages)
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)}")
    if "roots" in stages:
        stages = stages | {"preprocess"}
    if "cma" in stages and cfg.cma_init == "pseudoinverse":
        stages = stages | {"preprocess", "roots"}
    indices = range(cfg.trials)
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            trials = list(pool.map(_run_trial, [cfg] * cfg.trials, indices, [stages] * cfg.trials))
    else:
        trials = [_run_trial(cfg, t, stages) for t in indices]
    trials.sort(key=lambda t: t.trial)
    report = RunReport(cfg, frozenset(stages), trials)
    report.summary = aggregate(report.records, len(cfg.scenario.sources))
    return report


def exit_code(report: RunReport) -> int:
    """0 all good, 3 every trial failed numerically, 4 partial failure."""
    failed = [t for t in report.trials if t.status != "ok"]
    if not failed:
        return 0
    if len(failed) == len(report.trials) and all(t.error_kind == "numeric" for t in failed):
        return 3
    return 4
