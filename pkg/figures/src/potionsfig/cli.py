"""Command-line front end: render figures from records CSV files.

Exit codes follow the lab convention: 2 for unusable requests (unknown
kind, missing columns, nothing to plot), 1 for runtime failures such as
unreadable files.
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureError, FigureSpec, render, sidecar_path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="potionsfig",
        description="Render figures from simulation records CSV files.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure and its sidecar")
    r.add_argument("--kind", choices=list(KINDS), required=True)
    r.add_argument("--records", nargs="+", required=True,
                   help="one or more records CSV files")
    r.add_argument("--out", required=True, help="output image path")
    return ap


def cmd_render(args) -> int:
    spec = FigureSpec(records=tuple(args.records), kind=args.kind,
                      out=args.out)
    render(spec)
    print(args.out)
    print(sidecar_path(args.out))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return cmd_render(args)
    except (FigureError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
