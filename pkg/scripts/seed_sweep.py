"""Crosstalk nulling over many seeds of a scenario; one CSV row per seed.

    python scripts/seed_sweep.py [--scenario reference.yaml] [--seeds 0-9] [--out sweep.csv]
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

from nearfield.calibration import null_crosstalk
from nearfield.scenario import load_scenario


def parse_seeds(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="reference.yaml")
    ap.add_argument("--seeds", default="0-9", help="range A-B or comma list")
    ap.add_argument("--out", default=None, help="CSV path (default stdout)")
    args = ap.parse_args()

    base = load_scenario(args.scenario)
    x = base.crosstalk
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["seed", "R", "omega_nulled_hz", "omega_nulled_std_hz", "omega_driven_hz", "omega_driven_std_hz",
                "amplitude", "phase_rad", "evaluations", "diverged", "wall_s"])
    for seed in parse_seeds(args.seeds):
        sc = base.with_seed(seed)
        t0 = time.perf_counter()
        r = null_crosstalk(sc.env(x.driven_zone), x.driven_electrode, x.nulling_electrode, x.nulled_zone,
                           sc.optimizer, spam=sc.spam, driven_amplitude=x.driven_amplitude, initial=x.initial)
        w.writerow([seed, r.R, r.omega_nulled, r.omega_nulled_std, r.omega_driven, r.omega_driven_std,
                    r.amplitude, r.phase, r.iterations, r.diverged, round(time.perf_counter() - t0, 2)])
        out.flush()
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
