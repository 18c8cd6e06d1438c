"""Command line: ``harbench stats`` and ``harbench run``.

Exit codes: 0 success, 1 config error, 2 data error, 3 pipeline/model error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from . import dataset_io, pipeline
from .config import load_config
from .errors import ConfigError, HarError
from .evaluation import write_report

log = logging.getLogger("harbench")


def _setup_logging(verbose):
    level = logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def cmd_stats(args) -> int:
    cfg = load_config(args.config)
    if args.group_by:
        cfg = cfg.replace(group_by=args.group_by)
    cfg, warns = pipeline.resolve_config(cfg)
    for w in warns:
        log.warning(w)
    data = dataset_io.load_dataset(cfg)
    stats = dataset_io.compute_stats(data, cfg.group_by)
    print(dataset_io.format_stats_table(stats))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "stats.json"
    path.write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"\nstatistics written to {path}")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    report = pipeline.run(cfg, jobs=args.jobs)
    out = Path(args.out)
    write_report(report, out)
    if "representation" in report.artifacts:
        dataset_io.export_dataset(report.artifacts["representation"], out / "representation.csv")
    if report.selected_features:
        log.info("selected features: %s", ", ".join(report.selected_features["kept"]))
    print(report.summary())
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI workflow configuration")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("--verbose", "-v", action="count", default=0)

    p = argparse.ArgumentParser(prog="harbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("stats", parents=[common], help="dataset statistics")
    s.add_argument("--group-by", choices=("CLASS", "P_ID"), help="override group_by")
    s.set_defaults(func=cmd_stats)
    r = sub.add_parser("run", parents=[common], help="run the configured workflow")
    r.add_argument("--seed", type=int, help="override the run seed")
    r.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel training jobs; results do not depend on it")
    r.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except HarError as exc:
        kind = "config" if isinstance(exc, ConfigError) else "error"
        print(f"{kind}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
