"""``goodwin`` command line entry point.

Exit status: 0 success, 2 configuration error, 3 assumption failure,
4 numerical failure, 1 anything else.  Every error is also written to
stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys

from .io import RunConfig, _jsonable, run
from .model import AssumptionError, ConfigError

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_ASSUMPTION = 3
EXIT_NUMERICAL = 4


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="goodwin", description="Run a Goodwin-cycle experiment from a JSON config.")
    ap.add_argument("--config", required=True, help="path to the run configuration (JSON)")
    ap.add_argument("--output", help="output directory (overrides the config and $GOODWIN_OUTPUT_DIR)")
    ap.add_argument("--seed", type=_u64, help="override sde.seed")
    ap.add_argument("--threads", type=_positive_int, help="worker threads for ensembles")
    ap.add_argument("--no-plots", action="store_true", help="skip SVG figures")
    return ap


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    report = getattr(exc, "report", None)
    if report is not None:
        err["assumptions"] = report.to_dict()
    print(json.dumps(_jsonable(err), sort_keys=True, default=str), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.threads is not None:
            import numba

            if args.threads > numba.config.NUMBA_NUM_THREADS:
                raise ConfigError(f"--threads exceeds the {numba.config.NUMBA_NUM_THREADS} available")
            numba.set_num_threads(args.threads)
        manifest = run(cfg, output_dir=args.output, plots=not args.no_plots)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except AssumptionError as exc:
        return _fail(EXIT_ASSUMPTION, exc)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_OTHER, exc)
    print(json.dumps({"experiment": manifest["experiment"],
                      "artifacts": [a["path"] for a in manifest["artifacts"]]}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
