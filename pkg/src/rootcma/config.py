"""Flat ``dotted.key = value`` experiment configuration files.

Example::

    # three equal-power QPSK sources, noise free
    scenario.geometry.m = 8
    scenario.geometry.spacing_ratio = 0.5
    scenario.sources.angles_deg = -53.2, 3.23, 20.0
    scenario.num_snapshots = 8000
    run.trials = 1

Blank lines and ``#`` comments are ignored. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .array_model import ArrayGeometry, Scenario, SourceConfig
from .cma import DEFAULT_ASCENT_GAMMA, DEFAULT_DESCENT_GAMMA
from .errors import ConfigError, InvalidScenarioError


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    run_preprocessor: bool = True
    run_ascent: bool = False
    run_cma_equalizer: bool = False
    analytic_two_source: bool = False
    precond_gamma_mode: str = "adaptive"
    precond_gamma: float = 0.01
    precond_iterations: int | None = None
    selection_mode: str = "beam_response"
    selection_threshold: float | None = None
    cma_gamma: float = DEFAULT_DESCENT_GAMMA
    cma_iterations: int | None = None
    cma_init: str = "allpass"
    cma_source: int = 0
    ascent_gamma: float = DEFAULT_ASCENT_GAMMA
    ascent_iterations: int | None = None
    trials: int = 1
    workers: int = 1
    output_dir: str = "out"
    output_format: str = "csv"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("run.trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {self.output_format!r}")
        if self.precond_gamma_mode not in ("fixed", "adaptive"):
            raise ConfigError(f"preprocessor.gamma_mode must be fixed or adaptive, got {self.precond_gamma_mode!r}")
        if self.selection_mode not in ("unit_distance", "beam_response"):
            raise ConfigError(f"selection.mode must be unit_distance or beam_response, got {self.selection_mode!r}")
        if self.cma_init not in ("allpass", "pseudoinverse"):
            raise ConfigError(f"cma.init must be allpass or pseudoinverse, got {self.cma_init!r}")
        D = len(self.scenario.sources)
        if self.analytic_two_source and D != 2:
            raise ConfigError(f"pipeline.analytic_two_source requires exactly 2 sources, got {D}")
        if self.cma_init == "pseudoinverse" and not self.run_preprocessor:
            raise ConfigError("cma.init = pseudoinverse needs pipeline.run_preprocessor = true")
        if not 0 <= self.cma_source < D:
            raise ConfigError(f"cma.source must index one of the {D} sources")
        for name in ("precond_gamma", "cma_gamma", "ascent_gamma"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.replace(scenario=dataclasses.replace(self.scenario, seed=seed))


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _float(text: str) -> float:
    low = text.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _int(text: str) -> int:
    return int(text)


def _floats(text: str) -> list[float]:
    return [_float(t) for t in text.split(",") if t.strip()]


def _str(text: str) -> str:
    return text


def _optional_int(text: str) -> int | None:
    return None if text.lower() in ("none", "auto") else int(text)


def _optional_float(text: str) -> float | None:
    return None if text.lower() in ("none", "auto") else _float(text)


# key -> (parser, destination)
KEYS: dict[str, tuple[Callable[[str], Any], str]] = {
    "scenario.geometry.m": (_int, "m"),
    "scenario.geometry.spacing_ratio": (_float, "spacing_ratio"),
    "scenario.sources.angles_deg": (_floats, "angles"),
    "scenario.sources.amplitudes": (_floats, "amplitudes"),
    "scenario.snr_db": (_float, "snr_db"),
    "scenario.noise_free": (_bool, "noise_free"),
    "scenario.num_snapshots": (_int, "num_snapshots"),
    "scenario.seed": (_int, "seed"),
    "pipeline.run_preprocessor": (_bool, "run_preprocessor"),
    "pipeline.run_ascent": (_bool, "run_ascent"),
    "pipeline.run_cma_equalizer": (_bool, "run_cma_equalizer"),
    "pipeline.analytic_two_source": (_bool, "analytic_two_source"),
    "preprocessor.gamma_mode": (_str, "precond_gamma_mode"),
    "preprocessor.gamma": (_float, "precond_gamma"),
    "preprocessor.iterations": (_optional_int, "precond_iterations"),
    "selection.mode": (_str, "selection_mode"),
    "selection.threshold": (_optional_float, "selection_threshold"),
    "cma.gamma": (_float, "cma_gamma"),
    "cma.iterations": (_optional_int, "cma_iterations"),
    "cma.init": (_str, "cma_init"),
    "cma.source": (_int, "cma_source"),
    "ascent.gamma": (_float, "ascent_gamma"),
    "ascent.iterations": (_optional_int, "ascent_iterations"),
    "run.trials": (_int, "trials"),
    "run.workers": (_int, "workers"),
    "output.directory": (_str, "output_dir"),
    "output.format": (_str, "output_format"),
}

SCENARIO_FIELDS = {"m", "spacing_ratio", "angles", "amplitudes", "snr_db", "noise_free", "num_snapshots", "seed"}


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        key = key.lower()
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        parser, dest = KEYS[key]
        try:
            values[dest] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        lines[key] = lineno
    return _build(values, lines)


def _build(values: dict[str, Any], lines: dict[str, int]) -> ExperimentConfig:
    def line_of(*keys):
        return next((lines[k] for k in keys if k in lines), None)

    for required in ("scenario.geometry.m", "scenario.sources.angles_deg"):
        if required not in lines:
            raise ConfigError(f"missing required key {required!r}")
    angles = values["angles"]
    amplitudes = values.get("amplitudes", [1.0] * len(angles))
    if len(amplitudes) != len(angles):
        raise ConfigError(
            f"scenario.sources.amplitudes has {len(amplitudes)} entries for {len(angles)} angles",
            line_of("scenario.sources.amplitudes"),
        )
    noise_free = values.get("noise_free")
    snr = values.get("snr_db")
    if noise_free and snr is not None and math.isfinite(snr):
        raise ConfigError("scenario.noise_free = true conflicts with a finite scenario.snr_db", line_of("scenario.snr_db"))
    if noise_free is False and (snr is None or math.isinf(snr)):
        raise ConfigError("scenario.noise_free = false needs a finite scenario.snr_db", line_of("scenario.noise_free"))
    snr = math.inf if snr is None or noise_free else snr
    try:
        geometry = ArrayGeometry(values["m"], values.get("spacing_ratio", 0.5))
        sources = [SourceConfig(a, c) for a, c in zip(angles, amplitudes)]
        scenario = Scenario(
            geometry,
            tuple(sources),
            snr_db=snr,
            num_snapshots=values.get("num_snapshots", 8000),
            seed=values.get("seed", 0),
        )
    except InvalidScenarioError as exc:
        raise ConfigError(f"invalid scenario: {exc}", line_of("scenario.sources.angles_deg")) from None
    rest = {k: v for k, v in values.items() if k not in SCENARIO_FIELDS}
    return ExperimentConfig(scenario=scenario, **rest)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize back to the key-value format (round-trips through ``parse_config``)."""
    sc = cfg.scenario

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if v is None:
            return "auto"
        return repr(v) if isinstance(v, float) else str(v)

    lines = [
        f"scenario.geometry.m = {sc.geometry.num_elements}",
        f"scenario.geometry.spacing_ratio = {fmt(sc.geometry.spacing_ratio)}",
        "scenario.sources.angles_deg = " + ", ".join(repr(float(a)) for a in sc.angles_deg),
        "scenario.sources.amplitudes = " + ", ".join(repr(float(a)) for a in sc.amplitudes),
        "scenario.snr_db = " + ("inf" if sc.noise_free else repr(sc.snr_db)),
        f"scenario.num_snapshots = {sc.num_snapshots}",
        f"scenario.seed = {sc.seed}",
    ]
    for key, (_, dest) in KEYS.items():
        if dest in SCENARIO_FIELDS:
            continue
        lines.append(f"{key} = {fmt(getattr(cfg, dest))}")
    return "\n".join(lines) + "\n"
