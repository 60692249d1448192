"""plots render --kind <kind> --in <csv...> --out <img>"""

from __future__ import annotations

import argparse
import sys

from .render import SCHEMAS, FigureSpec, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(prog="plots")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure from benchmark CSVs")
    r.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    r.add_argument("--in", dest="inputs", required=True, nargs="+",
                   metavar="CSV")
    r.add_argument("--out", required=True, metavar="IMG")
    r.add_argument("--ref-slope", dest="ref_slopes", type=float, nargs="*",
                   default=[], help="dashed reference order lines (order kind)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                          reference_slopes=args.ref_slopes)
        render(spec)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
