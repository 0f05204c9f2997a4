# app.py
"""
Steklov spectra of convex polygons: command-line entry point

Usage:
    python app.py charpoly data/polygons/square.json
    python app.py isospectral data/polygons/obtuse_hexagon.json --mode admissible
    python app.py solve data/polygons/square.json --k 8 --out runs/square

Commands and flags are documented by ``python app.py --help``.
"""

import sys

from src.cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
