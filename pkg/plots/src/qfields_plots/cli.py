"""Command line front end: ``qfields-plot --kind <kind> --in <files...>
--out <image> [options]``.

Exit codes: 0 on success, 2 on bad usage, missing inputs or schema
mismatch, 1 when the selected data are empty (nothing to draw).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import EmptyPlotError, SchemaError
from .render import PLOT_KINDS, PlotJob, render

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_USAGE = 2

# which field columns a kind draws when --field is not given
_DEFAULT_FIELDS = {
    "field_profile": ("K", "Ktilde"),
    "field_heatmap": ("w",),
    "sign_map": ("K", "Ktilde"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qfields-plot",
        description="Render field/flow/verification data files into figures.",
    )
    ap.add_argument("--kind", required=True, choices=PLOT_KINDS)
    ap.add_argument(
        "--in", dest="inputs", required=True, nargs="+", metavar="FILE",
        help="input data file(s); the first one is read",
    )
    ap.add_argument("--out", required=True, metavar="IMAGE")
    ap.add_argument(
        "--field", default=None,
        help="comma-separated field columns (default depends on the kind)",
    )
    ap.add_argument(
        "--time", type=float, default=None,
        help="snapshot time for single-snapshot kinds (default: first)",
    )
    ap.add_argument("--title", default=None)
    ap.add_argument(
        "--bound", type=float, default=0.25,
        help="reference line for uncertainty_curve (negative to disable)",
    )
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    for p in args.inputs:
        if not Path(p).is_file():
            print(f"input file not found: {p}", file=sys.stderr)
            return EXIT_USAGE

    if args.field is not None:
        fields = tuple(s.strip() for s in args.field.split(",") if s.strip())
    else:
        fields = _DEFAULT_FIELDS.get(args.kind, ())
    job = PlotJob(
        kind=args.kind,
        inputs=tuple(Path(p) for p in args.inputs),
        out=Path(args.out),
        fields=fields,
        time=args.time,
        title=args.title,
        bound=None if args.bound < 0 else args.bound,
    )
    try:
        out = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyPlotError as exc:
        print(f"nothing to draw: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
