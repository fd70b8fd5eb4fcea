"""Command line for the figure renderer.

    plots accuracy --in run1.csv --in run2.csv --out accuracy.png
    plots bound --in sweep.csv --out bound.svg --logy --series K=1 --series K=5
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="inputs", action="append", required=True,
                       metavar="CSV", help="input CSV (repeatable)")
        p.add_argument("--out", required=True, help="output image (.png or .svg)")
        p.add_argument("--series", action="append", default=[],
                       help="only plot this series label (repeatable)")
        p.add_argument("--logy", action="store_true", help="log-scale y axis")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        inputs=tuple(args.inputs),
        kind=args.kind,
        out=args.out,
        series=tuple(args.series),
        logy=args.logy,
    )
    try:
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
