"""figplots plot --spec spec.json: render panels for a trajectory directory."""

from __future__ import annotations

import argparse
import sys

from .render import load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figplots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render the panels described by a spec file")
    p.add_argument("--spec", required=True, help="JSON plot specification")
    args = parser.parse_args(argv)
    out = render(load_spec(args.spec))
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
