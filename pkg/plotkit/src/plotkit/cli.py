"""Script entry point: plotkit CSV [CSV...] --panel ner --out-dir figs"""

from __future__ import annotations

import argparse
import sys

from .panels import PlotSpec, plot
from .reader import EmptySelection, SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plotkit",
        description="Render qbeam run CSVs into figure panels",
    )
    ap.add_argument("csv", nargs="+", help="run CSV file(s)")
    ap.add_argument("--panel", action="append", default=None,
                    help="ner, ser:<l> or fb:<l>; repeatable "
                         "(default: ner)")
    ap.add_argument("--out-dir", default=".")
    ap.add_argument("--ref-slope", action="append", type=float, default=None,
                    help="draw a P^-d1 guide line; repeatable")
    ap.add_argument("--schemes", default=None,
                    help="comma list of scheme names to draw (default: all)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        csv_paths=tuple(args.csv),
        panels=tuple(args.panel or ["ner"]),
        out_dir=args.out_dir,
        ref_slopes=tuple(args.ref_slope or []),
        schemes=tuple(args.schemes.split(",")) if args.schemes else None,
    )
    try:
        written = plot(spec)
    except (SchemaMismatch, EmptySelection, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
