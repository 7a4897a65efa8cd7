"""`shim serve` entry point."""

from __future__ import annotations

import argparse
import sys

from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="shim")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("serve", help="serve the line protocol on stdin/stdout")
    args = parser.parse_args(argv)
    if args.command == "serve":
        return serve()
    return 2


if __name__ == "__main__":
    sys.exit(main())
