#!/usr/bin/env python3
"""Basin sweep for a model configuration.

Integrates a lattice of initial conditions and reports the fraction
that reach the predicted attractor.  Example:

    python3 scripts/convergence_sweep.py config.json --lattice 4 --out sweep_out
"""

import argparse
import sys

from sirskit.cli import main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config")
    parser.add_argument("--lattice", type=int, default=4)
    parser.add_argument("--t-end", type=float, default=500.0)
    parser.add_argument("--out", default="sweep_out")
    args = parser.parse_args()
    sys.exit(main(["sweep", args.config, "--lattice", str(args.lattice),
                   "--t-end", str(args.t_end), "--out", args.out]))
