"""Command line entry point: ``cqnls <experiment> --config FILE [--out DIR]``."""

from __future__ import annotations

import argparse
import logging
import sys

from ..cnfd import StepFailure
from ..groundstate import NoGroundState
from ..linsolve import NoConvergence
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config
from .experiments import LevelFailure, run_experiment
from .snapshot import SnapshotFormatError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("cqnls")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cqnls", description="Cubic-quintic NLS solvers and studies")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", help="output directory (default: config 'out' or ./out)")
    ap.add_argument("--workers", type=int, help="parallel levels / raster rows")
    ap.add_argument("--seed", type=int, help="random seed (random initial data)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = dict(experiment=args.experiment, out=args.out, workers=args.workers, seed=args.seed)
    try:
        if args.config:
            cfg = load_config(args.config, **overrides)
        else:
            cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None}).validate()
        log.info("running %s into %s", cfg.experiment, cfg.out)
        run_experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepFailure, NoConvergence, NoGroundState, LevelFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, SnapshotFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
