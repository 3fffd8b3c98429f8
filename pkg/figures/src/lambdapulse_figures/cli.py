"""Figure-rendering entry point.

Usage:
    render --all CSV_DIR OUT_DIR      render every figure
    render FIG_ID CSV_PATH OUT_DIR    render a single figure
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, RenderError, render, render_all


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="render", description=__doc__)
    ap.add_argument("--all", action="store_true", help="render every figure from a CSV directory")
    ap.add_argument("args", nargs="*", metavar="ARG")
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.all:
            if len(ns.args) != 2:
                print("usage: render --all CSV_DIR OUT_DIR", file=sys.stderr)
                return 2
            written = render_all(ns.args[0], ns.args[1])
        else:
            if len(ns.args) != 3:
                print("usage: render FIG_ID CSV_PATH OUT_DIR", file=sys.stderr)
                return 2
            fig_id, csv_path, out_dir = ns.args
            if fig_id not in FIGURES:
                print(f"unknown figure id {fig_id!r}; expected one of {sorted(FIGURES)}", file=sys.stderr)
                return 2
            written = render(fig_id, csv_path, out_dir)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
