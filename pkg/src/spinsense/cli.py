"""Command-line front end.

Subcommands:

* ``figure NAME``: regenerate a named reference sweep (CSV + sidecar + PNG).
* ``sweep --config FILE``: run a configured parameter sweep.
* ``report --config FILE``: print a single-point sensitivity report as JSON.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .figures import FIGURES, run_figure
from .specfun import NonConvergenceError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinsense",
        description=(
            "Sensitivity limits of free-electron magnetic-spin sensing: "
            "Fisher information, trace distances, and required electron counts."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fig = sub.add_parser("figure", help="regenerate a named reference sweep")
    p_fig.add_argument("name", choices=sorted(FIGURES), help="preset name")
    p_fig.add_argument("--out", default="out", help="output directory")
    p_fig.add_argument("--seed", type=int, default=0)
    p_fig.add_argument("--workers", type=int, default=1)
    p_fig.add_argument("--no-plot", dest="plot", action="store_false",
                       help="skip the quick-look PNG")

    p_sweep = sub.add_parser("sweep", help="run a configured parameter sweep")
    p_sweep.add_argument("--config", required=True, help="YAML configuration file")
    p_sweep.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY.PATH=VALUE", help="override a config entry")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="master seed for stochastic columns")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", default="out", help="output directory")
    p_sweep.add_argument("--name", default="sweep", help="output file stem")
    p_sweep.add_argument("--no-plot", dest="plot", action="store_false")

    p_rep = sub.add_parser("report", help="single-point sensitivity report (JSON)")
    p_rep.add_argument("--config", required=True)
    p_rep.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY.PATH=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure":
            result = run_figure(
                args.name, Path(args.out),
                workers=args.workers, seed=args.seed, plot=args.plot,
            )
            print(f"wrote {result['csv']}")
            if result["png"] is not None:
                print(f"wrote {result['png']}")
            return 0
        if args.command == "sweep":
            from .sweep import run_sweep

            run = load_config(args.config, args.overrides)
            if not run.has_sweep:
                raise ConfigError(["sweep: configuration has no sweep block"])
            result = run_sweep(
                run, Path(args.out), name=args.name,
                seed=args.seed, workers=args.workers,
            )
            print(f"wrote {result['csv']}")
            if args.plot:
                from .plotting import render_csv

                png = render_csv(result["csv"])
                print(f"wrote {png}")
            return 0
        if args.command == "report":
            from .report import sensitivity_report

            run = load_config(args.config, args.overrides)
            print(json.dumps(sensitivity_report(run), indent=2, sort_keys=True))
            return 0
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(
            f"numerical non-convergence: {exc} "
            f"(best estimate {exc.value!r}, error bound {exc.error!r})",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
