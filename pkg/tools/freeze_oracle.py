"""Regenerate tests/data/oracle_kinetic.csv from the traveling-wave oracle.

Usage: python3 tools/freeze_oracle.py
"""

import csv
import json
import os
import platform

import numpy as np
import scipy

import wcdshock
from wcdshock.oracles import TravelingWaveProblem, traveling_wave_kinetic

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, os.pardir, "tests", "data")

DELTAS = (0.3, 1.0, 5.0)
U_MINUS = (2.0, 3.0, 4.0, 6.5, 10.0, 30.0)


def main():
    os.makedirs(OUT, exist_ok=True)
    path = os.path.join(OUT, "oracle_kinetic.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["delta", "u_minus", "u_plus", "s", "residual"])
        for delta in DELTAS:
            for um in U_MINUS:
                r = traveling_wave_kinetic(TravelingWaveProblem(um, delta))
                w.writerow([f"{delta:.17g}", f"{um:.17g}", f"{r.u_plus:.17g}",
                            f"{r.speed:.17g}", f"{r.residual:.17g}"])

    meta = {
        "generator": "tools/freeze_oracle.py",
        "oracle": "wcdshock.oracles.traveling_wave_kinetic",
        "settings": {"tol": TravelingWaveProblem(1.0).tol,
                     "max_arc_length": TravelingWaveProblem(1.0).max_arc_length},
        "package_version": wcdshock.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    with open(os.path.join(OUT, "oracle_kinetic.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    print(path)


if __name__ == "__main__":
    main()
