"""Standalone figure renderer: cga-plot --input data.csv --output fig.png --kind ...

Prints the figure's summary statistics to stdout (one ``key=value`` line per
entry, in a fixed order); identical inputs print identical summaries.  Exit
codes: 0 success, 2 bad flags or schema mismatch, 3 output I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cga-plot",
                                     description="Render a cga-lab experiment CSV.")
    parser.add_argument("--input", required=True, help="experiment CSV path")
    parser.add_argument("--output", required=True, help="image output path")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--title")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(args.input, args.output, args.kind,
                      title=args.title, xlabel=args.xlabel, ylabel=args.ylabel)
    try:
        summary = render(spec)
    except SchemaError as exc:
        print(f"cga-plot: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cga-plot: error: {exc}", file=sys.stderr)
        return 3
    for key, value in summary.items():
        print(f"{key}={value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
