"""Solve for the reference two-zone field map and write the shipped scenarios.

The map is synthetic. Each electrode's near/far pi ratio equals its table
ratio. Electrodes 1 and 8 are sized so the crosstalk experiments reach the
target driven Rabi frequencies at their analytic nulls. The sigma fields in
the nulled zone are set by inverting the off-resonant range and the
worst-case AC Zeeman shift. Electrode 7 is shaped for the sigma+ null.

    python scripts/design_reference_scenario.py [--out-dir DIR]
"""

from __future__ import annotations

import argparse
import cmath
import math
from pathlib import Path

import numpy as np
import yaml
from scipy.optimize import brentq, fsolve

from nearfield.atomic import QUBIT, Polarization, ca43, dipole_matrix_element
from nearfield.budget import spectator_errors
from nearfield.calibration import SIGMA_MINUS_PROBE, SIGMA_PLUS_TARGET
from nearfield.fields import PolarizationComponents, polarization_compose

B = 2.8
AXIS = (0.0, 0.0, 1.0)
TABLE_RATIOS = {1: 3.6, 2: 0.93, 3: 2.6, 4: 1.7, 5: 0.43, 6: 1.5, 7: 0.78, 8: 2.9}
HOME = {1: "B", 2: "B", 3: "B", 4: "B", 5: "A", 6: "A", 7: "A", 8: "A"}

OMEGA_DRIVEN_A = 15.29e3  # zone B driven by 1, zone A nulled by 8
OMEGA_DRIVEN_B = 10.07e3  # zone A driven by 8, zone B nulled by 1
OFFRES_RANGE = (0.6e-3, 5e-3)
WORST_SHIFT = 340.0  # Hz
OMEGA_SIGMA_MINUS = 11.49e3  # on-resonance sigma- Rabi after the sigma+ null
POL_FIXED_AMPLITUDE = 0.5
POL_NULL = (0.6, 1.3)  # electrode 7 (amplitude, phase) at the sigma+ null
PI_LEFT_AFTER_POL_NULL = 0.1

# phases of the far fields and the remaining electrodes, fixed arbitrary choices
ALPHA_1A, BETA_8B = 0.7, -1.1
SIGMA_PHASE = {("1", "+"): 0.4, ("1", "-"): -0.9}


def c(x, phase=0.0) -> complex:
    return x * cmath.exp(1j * phase)


def solve_pi():
    """|pi| near fields of electrodes 1 and 8.

    At either null the far-field feedback scales the driven field by the
    same factor |1 - exp(i(alpha+beta)) / (r1 r8)|, so both sizes follow in
    closed form.
    """
    g = abs(1 - cmath.exp(1j * (ALPHA_1A + BETA_8B)) / (TABLE_RATIOS[1] * TABLE_RATIOS[8]))
    return OMEGA_DRIVEN_A / g, OMEGA_DRIVEN_B / g


def solve_sigma(constants):
    """Constructive sigma+/sigma- magnitudes S and the common depth k=D/S in
    the nulled zone so that the off-resonant range and worst shift hit
    their targets."""
    def errors(sp, sm, k):
        a = PolarizationComponents(0, sp * (1 + k) / 2, sm * (1 + k) / 2)
        b = PolarizationComponents(0, sp * (1 - k) / 2, sm * (1 - k) / 2)
        return spectator_errors(constants, QUBIT, B, (a, b))

    def eqs(v):
        sp, sm, k = v
        e = errors(sp, sm, k)
        return [e.off_resonant[1] / OFFRES_RANGE[1] - 1, e.off_resonant[0] / OFFRES_RANGE[0] - 1,
                abs(e.shift_worst) / WORST_SHIFT - 1]

    sp, sm, k = fsolve(eqs, [45.7e3, 74.8e3, 0.346], xtol=1e-13)
    return sp, sm, k, errors(sp, sm, k)


def shift_of(constants, sp, sm):
    return spectator_errors(constants, QUBIT, B, (PolarizationComponents(0, sp, sm), PolarizationComponents(0, 0, 0))).shift_actual


def design(seed: int = 20160418):
    C = ca43()
    p1, p8 = solve_pi()
    n8 = -c(p1 / TABLE_RATIOS[1], ALPHA_1A) / p8
    a8, phi8 = abs(n8), cmath.phase(n8) % (2 * math.pi)
    sp, sm, k, err = solve_sigma(C)

    # zone-A sigma: electrode 1 carries the larger share, electrode 8 (as
    # driven at the null) the smaller; the actual relative phases are picked
    # so the nulled qubit sees almost no AC Zeeman shift
    s1p, s1m = sp * (1 + k) / 2, sm * (1 + k) / 2
    s8p, s8m = sp * (1 - k) / 2, sm * (1 - k) / 2
    cm = sm * k  # sigma- fully destructive
    cp = brentq(lambda x: shift_of(C, x, cm), sp * k, sp)  # sigma+ that zeroes the shift
    # relative phase giving |s1 + s8| = target
    rel = lambda a, b, t: math.acos(np.clip((t * t - a * a - b * b) / (2 * a * b), -1, 1))
    t1p, t1m = SIGMA_PHASE[("1", "+")], SIGMA_PHASE[("1", "-")]
    sig8p = c(s8p, t1p + rel(s1p, s8p, cp)) / n8
    sig8m = c(s8m, t1m + rel(s1m, s8m, cm)) / n8

    comps = {
        (1, "B"): PolarizationComponents(p1, c(0.02 * p1, 2.1), c(0.03 * p1, -0.4)),
        (1, "A"): PolarizationComponents(c(p1 / TABLE_RATIOS[1], ALPHA_1A), c(s1p, t1p), c(s1m, t1m)),
        (8, "A"): PolarizationComponents(p8, sig8p, sig8m),
        (8, "B"): PolarizationComponents(c(p8 / TABLE_RATIOS[8], BETA_8B), c(0.03 * p8 / TABLE_RATIOS[8], 0.3),
                                         c(0.02 * p8 / TABLE_RATIOS[8], 1.9)),
    }

    # electrode 7: with 8 at POL_FIXED_AMPLITUDE, setting POL_NULL cancels
    # sigma+, leaves OMEGA_SIGMA_MINUS on the probe and most of pi cancelled
    a7, phi7 = POL_NULL
    g7 = c(a7, phi7)
    d_probe = abs(dipole_matrix_element(C, SIGMA_MINUS_PROBE, B))
    f8 = POL_FIXED_AMPLITUDE
    m8 = sig8m * f8
    want_m = c(OMEGA_SIGMA_MINUS / d_probe, cmath.phase(m8))
    comps[(7, "A")] = PolarizationComponents(
        -(1 - PI_LEFT_AFTER_POL_NULL) * p8 * f8 / g7, -sig8p * f8 / g7, (want_m - m8) / g7)
    p7a = abs(comps[(7, "A")].pi)
    comps[(7, "B")] = PolarizationComponents(c(p7a / TABLE_RATIOS[7], 2.5), c(0.05 * p7a, 0.1), c(0.05 * p7a, -2.2))

    rng = np.random.default_rng(seed)
    for e in (2, 3, 4, 5, 6):
        near = float(rng.uniform(6e3, 16e3))
        far_zone = "A" if HOME[e] == "B" else "B"
        ph = rng.uniform(0, 2 * math.pi, 6)
        comps[(e, HOME[e])] = PolarizationComponents(c(near, ph[0]), c(0.05 * near, ph[1]), c(0.05 * near, ph[2]))
        far = near / TABLE_RATIOS[e]
        comps[(e, far_zone)] = PolarizationComponents(c(far, ph[3]), c(0.05 * far, ph[4]), c(0.05 * far, ph[5]))

    info = {
        "pi_near_1_hz": p1, "pi_near_8_hz": p8, "null_amplitude_8": a8, "null_phase_8": phi8,
        "sigma_plus_constructive_hz": sp, "sigma_minus_constructive_hz": sm, "depth": k,
        "offres_range": err.off_resonant, "worst_shift_hz": err.shift_worst,
        "actual_sigma_plus_hz": cp, "actual_sigma_minus_hz": cm,
        "sigma_plus_rabi_8_pol_hz": abs(sig8p * f8) * abs(dipole_matrix_element(C, SIGMA_PLUS_TARGET, B)),
    }
    return comps, info


def _field_yaml(p: PolarizationComponents):
    v = polarization_compose(p, AXIS).vector
    return [[float(round(x.real, 9)), float(round(x.imag, 9))] for x in v]


def scenario_doc(comps, info, *, noiseless: bool):
    pi_only = lambda p: PolarizationComponents(p.pi, 0, 0)
    electrodes = {}
    for e in sorted(HOME):
        electrodes[e] = {
            "home": HOME[e],
            "field": {z: _field_yaml(pi_only(comps[(e, z)]) if noiseless else comps[(e, z)]) for z in ("A", "B")},
        }
    doc = {
        "name": "reference-noiseless" if noiseless else "reference",
        "seed": 20160418,
        "constants": "ca43.yaml",
        "B_gauss": B,
        "qubit": {"lower": [4, 0], "upper": [3, 0]},
        "quantization_axis": [0.0, 0.0, 1.0],
        "zones": ["A", "B"],
        "electrodes": electrodes,
        "table_ratios": dict(TABLE_RATIOS),
        "shot_period_s": 0.01,
        "crosstalk": {
            "driven_zone": "B", "nulled_zone": "A", "driven_electrode": 1, "nulling_electrode": 8,
            "driven_amplitude": 1.0, "initial": {"amplitude": 0.3, "phase_rad": 2.0},
        },
        "polarization": {
            "zone": "A", "fixed_electrode": 8, "nulling_electrode": 7,
            "fixed_amplitude": POL_FIXED_AMPLITUDE, "initial": {"amplitude": 0.45, "phase_rad": 1.0},
        },
        "monitor": {"duration_s": 4000.0, "sample_interval_s": 100.0},
        "budget": {
            "reference_R": 1.2e-3,
            "measured_total_bound": 3.0e-3,
            "stability_fraction": 3.0e-3,
            "projections": [
                {"name": "clock-288G", "lower": [4, 1], "upper": [3, 1], "B_gauss": 287.78},
                {"name": "clock-146G", "lower": [4, 0], "upper": [3, 1], "B_gauss": 146.09},
            ],
        },
    }
    if noiseless:
        doc["spam"] = {"prep_error": 0.0, "p_dark_given_dark": 1.0, "p_dark_given_bright": 0.0}
        doc["optimizer"] = {"exact": True, "phase_tol": 1e-7, "amplitude_rel_tol": 1e-7, "max_span": 0.1}
    else:
        doc["spam"] = {"prep_error": 0.03, "p_dark_given_dark": 0.93, "p_dark_given_bright": 0.0}
        doc["drift"] = {
            "knot_interval_s": 1.0,
            "default": {
                "phase": {"relaxation_time_s": 300.0, "stationary_std": 1.0e-3, "jitter_std": 2.0e-3},
                "log_amplitude": {"relaxation_time_s": 300.0, "stationary_std": 2.0e-4, "jitter_std": 2.0e-3},
            },
        }
        doc["optimizer"] = {"max_evaluations": 60, "points": 16, "shots": 100, "max_span": 0.1}
    return doc


HEADER = """# Two-zone surface-trap scenario with eight microwave electrodes (synthetic
# near fields). Generated by scripts/design_reference_scenario.py; edit the
# script, not this file. Field vectors are Cartesian [re, im] pairs in Hz of
# Rabi frequency per unit matrix element.
"""


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parents[1] / "src/nearfield/data")
    args = ap.parse_args(argv)
    comps, info = design()
    for k, v in info.items():
        print(f"{k}: {v}")
    for noiseless, name in ((False, "reference.yaml"), (True, "noiseless.yaml")):
        text = HEADER + yaml.safe_dump(scenario_doc(comps, info, noiseless=noiseless), sort_keys=False,
                                       default_flow_style=None, width=120)
        (args.out_dir / name).write_text(text)
        print(f"wrote {args.out_dir / name}")


if __name__ == "__main__":
    main()
