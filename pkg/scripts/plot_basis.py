#!/usr/bin/env python3
"""Render the first few basis generators as a stacked-panel SVG.

Usage: python scripts/plot_basis.py [outdir]
"""

import os
import sys

from shiftortho.cli import main

outdir = sys.argv[1] if len(sys.argv) > 1 else "out"
os.makedirs(outdir, exist_ok=True)
raise SystemExit(
    main(
        [
            "sopw",
            "--L", "8",
            "--N", "6",
            "--plot", os.path.join(outdir, "basis_first6.svg"),
            "--table", os.path.join(outdir, "basis_table.csv"),
            "--grid", "1024",
        ]
    )
)
