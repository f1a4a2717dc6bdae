#!/usr/bin/env python3
"""Run every check family at the wide settings and write the JSON-lines
report (honors PERMTWIST_REPORT_DIR, defaults to ./reports)."""

from __future__ import annotations

import sys

from permtwist.cli import main

if __name__ == "__main__":
    sys.exit(main(["report", "--full", *sys.argv[1:]]))
