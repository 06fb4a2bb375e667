"""plots <figure-id> --in a.csv [--in b.csv] --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="regenerate figures from shearfront CSVs")
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--loglog", action="store_true",
                        help="force log-log axes where applicable")
    parser.add_argument("--guide-slope", dest="guide_slopes", action="append",
                        type=float, default=None,
                        help="reference slope guide line (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(figure_id=args.figure_id, inputs=tuple(args.inputs),
                          output=args.out, loglog=args.loglog,
                          guide_slopes=tuple(args.guide_slopes or ()))
        out = render(spec)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
