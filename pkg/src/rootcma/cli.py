"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 some trials failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .array_model import synthesize
from .config import load_config
from .errors import ConfigError, NumericError, StageNotRunError
from .output import FIGURES, emit_figure_data, write_metadata, write_report, write_snapshots, write_weights
from .pipeline import default_stages, exit_code, run_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4

VERB_FIGURES = {
    "precondition": ("learning",),
    "roots": ("roots", "deviation", "beam"),
    "cma": ("learning", "beam"),
    "sweep": FIGURES,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rootcma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "synthesize snapshot matrices",
        "precondition": "run the LMS preprocessor and emit its learning curve",
        "roots": "preprocessor, roots, model order and DOA estimates",
        "cma": "run the CMA equalizer (and the ascent estimate if configured)",
        "sweep": "Monte Carlo run of every stage enabled in the config",
    }
    for verb, text in helps.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", type=Path)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--workers", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    if args.format is not None:
        changes["output_format"] = args.format
    if args.workers is not None:
        changes["workers"] = args.workers
    return cfg.replace(**changes) if changes else cfg


def _stages_for(verb, cfg):
    if verb == "precondition":
        return {"preprocess"}
    if verb == "roots":
        return {"preprocess", "roots"} | ({"ascent"} if cfg.run_ascent else set())
    if verb == "cma":
        return {"cma"} | ({"ascent"} if cfg.run_ascent else set())
    return default_stages(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_metadata(out, args.command)

    if args.command == "simulate":
        ext = cfg.output_format
        for t in range(cfg.trials):
            X = synthesize(cfg.scenario, t)
            write_snapshots(out / f"snapshots_{t:04d}.{ext}", X.entries, ext)
        return EXIT_OK

    try:
        report = run_pipeline(cfg, _stages_for(args.command, cfg))
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_report(report, out)
    if args.command == "precondition":
        first = next((t for t in report.trials if "u" in t.artifacts), None)
        if first is not None:
            write_weights(out / "weights_u.csv", first.artifacts["u"])
    for which in VERB_FIGURES[args.command]:
        try:
            emit_figure_data(report, which, out)
        except StageNotRunError:
            continue
    for key, value in report.summary.items():
        print(f"{key}: {value}")
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
