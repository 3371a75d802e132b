"""Command-line entry point.

Exit status: 0 success, 1 invalid configuration or missing stage input,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .logs import write_records
from .pipeline import StageError, run_stage, update_manifest
from .synthetic import synthetic_logs

log = logging.getLogger("exsearch")

PIPELINE_ORDER = ("filter", "weak-label", "build-corpus", "train", "evaluate", "tag", "analyze", "report")


def _abs(p: str | None) -> str | None:
    return str(Path(p).resolve()) if p else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exsearch", description="Mine software exceptions from search logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="TOML config file")
    common.add_argument("-o", "--output-dir", help="artifact directory (overrides config and $EXSEARCH_OUTPUT_DIR)")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="max worker processes (0 = all cores)")
    common.add_argument("--training-input", help="raw training-period log file")
    common.add_argument("--analysis-input", help="raw analysis-period log file")
    common.add_argument("--format", choices=["jsonl", "tsv"])
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config value (repeatable)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")

    helps = {
        "filter": "keep English/US exception-keyword queries with clicks",
        "weak-label": "label filtered queries with the regex rules and apply the denylist",
        "build-corpus": "build the 1:1 BIO training corpus",
        "train": "train the CRF and write model.crf",
        "evaluate": "score the model on held-out or annotated sequences",
        "tag": "filter, sessionize and tag the analysis logs",
        "analyze": "compute metric tables (CSV)",
        "report": "bundle the CSV tables into report.json",
        "pipeline": "run every stage in order",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)

    syn = sub.add_parser("synth", help="write synthetic training and analysis logs")
    syn.add_argument("outdir")
    syn.add_argument("--records", type=int, default=20000, help="records per file")
    syn.add_argument("--seed", type=int, default=0)
    return parser


def _setup_logging(args) -> None:
    level = logging.WARNING if getattr(args, "quiet", False) else (
        logging.DEBUG if getattr(args, "verbose", 0) > 0 else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _synth(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(synthetic_logs(args.records, seed=args.seed), out / "train_logs.jsonl")
    write_records(synthetic_logs(args.records, seed=args.seed + 1), out / "analysis_logs.jsonl")
    print(out / "train_logs.jsonl")
    print(out / "analysis_logs.jsonl")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args)
    if args.command == "synth":
        return _synth(args)
    try:
        cfg = load_config(
            args.config,
            overrides={
                "output_dir": _abs(args.output_dir),
                "seed": args.seed,
                "workers": args.workers,
                "inputs.training": _abs(args.training_input),
                "inputs.analysis": _abs(args.analysis_input),
                "inputs.format": args.format,
            },
            sets=args.set,
        )
        stages = PIPELINE_ORDER if args.command == "pipeline" else (args.command,)
        cfg.validate(None if args.command == "pipeline" else args.command)
        if args.command == "pipeline":
            for needed in ("training", "analysis"):
                if not getattr(cfg.inputs, needed):
                    raise ConfigError([f"[inputs] {needed} is required for the full pipeline"])
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 1
    for stage in stages:
        try:
            for p in run_stage(stage, cfg):
                log.debug("wrote %s", p)
        except StageError as exc:
            print(f"{stage}: {exc}", file=sys.stderr)
            return 1
        except Exception as exc:  # noqa: BLE001 - top-level boundary
            log.debug("stage failure", exc_info=True)
            print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
    update_manifest(cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
