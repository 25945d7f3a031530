#!/usr/bin/env python3
"""Run the full bundled-benchmark reproduction and print the report path.

Thin wrapper over `lpvflow repro`; all knobs are the CLI flags.
"""

import sys

from lpvflow.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if not any(a == "--out" or a.startswith("--out=") for a in argv):
        argv = ["--out", "repro_out", *argv]
    raise SystemExit(main(["repro", *argv]))
