#!/usr/bin/env python3
"""Run the bundled reference scenario end to end.

Writes analysis JSONs, trajectory CSVs, the h(u) curve and a summary
with pass/fail checks into the output directory (default ``out/``).
"""

import sys

from sirskit.cli import main

if __name__ == "__main__":
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "out"
    sys.exit(main(["reproduce", "--out", out_dir]))
