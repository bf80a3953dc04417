"""Command line front end for the figure scripts.

Subcommands: plot-validation, plot-comparison. Exit codes follow the
harness convention: 0 success, 1 usage errors, 2 runtime failures (bad
input files included). Input CSVs are never modified; --dump-json writes
the plotted numbers next to the image for exact checks.
"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import plot_comparison, plot_validation_curve

USAGE_EXIT = 1
RUNTIME_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 for runtime failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="contim-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    val = sub.add_parser("plot-validation",
                         help="validation curves with a one-std band")
    val.add_argument("logs", nargs="+", metavar="LOG",
                     help="training-log CSV files, one line each")
    comp = sub.add_parser("plot-comparison",
                          help="mean normalized influence per method")
    comp.add_argument("results", metavar="RESULTS",
                      help="results CSV from the harness")
    comp.add_argument("--group-by", metavar="KEY",
                      help="sweep column to group on: q, T or V")
    for p in (val, comp):
        p.add_argument("--out", required=True, metavar="PNG",
                       help="image file to write")
        p.add_argument("--dump-json", metavar="PATH",
                       help="also write the plotted numbers as JSON")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "plot-validation":
            payload = plot_validation_curve(args.logs, args.out)
        else:
            payload = plot_comparison(args.results, args.out,
                                      group_by=args.group_by)
        if args.dump_json:
            with open(args.dump_json, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        print(f"wrote {args.out}")
        return 0
    except Exception as exc:  # bad input files and schema mismatches
        print(f"contim-plots: error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
