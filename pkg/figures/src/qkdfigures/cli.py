"""Command-line entry: figures --input sweep.csv --figure bb84 --out fig.png"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .render import FIGURES, FigureError, FigureSpec, render

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render qkdlink sweep CSVs into transmittance and QBER/keyrate figures.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--input", required=True, help="sweep CSV produced by 'qkdlink sweep'")
    parser.add_argument("--figure", required=True, choices=FIGURES)
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        render(FigureSpec(input_csv=args.input, figure=args.figure, output_path=args.out))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
