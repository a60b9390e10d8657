"""Closed-form addressing-error metrics and the error-budget report.

Sign ledger for the AC Zeeman shift. In the frame rotating at the drive
frequency f_d, a spectator channel c of frequency f_c sits at detuning
Delta_c = f_c - f_d. If the channel dresses the lower qubit level, that level
is pushed down by Omega^2/(4 Delta_c); if it dresses the upper qubit level,
that level is pushed up by Omega^2/(4 Delta_c). Either way the qubit
frequency moves by +Omega^2/(4 Delta_c), so every channel enters with s=+1
once Delta_c carries its sign.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .atomic import (
    AtomicConstants,
    HyperfineState,
    Polarization,
    Transition,
    dipole_matrix_element,
    transition_frequency,
)
from .errors import PhysicsError
from .fields import ElectrodeFieldMap, PolarizationComponents


def spin_flip_error(R: float) -> tuple[float, float]:
    """Crosstalk spin-flip probability during a pi pulse on the driven ion.

    Returns (exact, small-angle) = (sin^2(pi R / 2), pi^2 R^2 / 4).
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    return math.sin(math.pi * R / 2) ** 2, math.pi**2 * R**2 / 4


def off_resonant_error(omega: float, delta: float) -> float:
    """Worst-case (envelope) transfer Omega^2/(Omega^2 + Delta^2)."""
    if omega < 0:
        raise ValueError("omega must be >= 0")
    if math.isinf(delta):
        return 0.0
    g2 = omega * omega + delta * delta
    if g2 == 0:
        raise PhysicsError("off-resonant error undefined for omega = delta = 0")
    return float(omega * omega / g2)


def off_resonant_range(
    pair: Sequence[PolarizationComponents],
    delta: float | Mapping[Polarization, float],
    elements: Mapping[Polarization, float] | None = None,
    channels: Sequence[Polarization] = (Polarization.SIGMA_PLUS, Polarization.SIGMA_MINUS),
) -> tuple[float, float]:
    """(min, max) spectator excitation over the relative phase of two
    electrodes' fields, summed over ``channels``.

    ``delta`` and ``elements`` may be given per channel; elements default to 1.
    """
    p1, p2 = pair
    lo = hi = 0.0
    for pol in channels:
        d = delta[pol] if isinstance(delta, Mapping) else delta
        m = abs(elements[pol]) if elements is not None else 1.0
        a, b = m * abs(p1.component(pol)), m * abs(p2.component(pol))
        lo += off_resonant_error(abs(a - b), d)
        hi += off_resonant_error(a + b, d)
    return lo, hi


def ac_zeeman_shift(rabi, detunings, signs=None) -> float:
    """Qubit-frequency shift sum_c s_c Omega_c^2 / (4 Delta_c) in Hz."""
    rabi = np.atleast_1d(np.asarray(rabi, dtype=float))
    det = np.atleast_1d(np.asarray(detunings, dtype=float))
    s = np.ones_like(rabi) if signs is None else np.atleast_1d(np.asarray(signs, dtype=float))
    if np.any(det == 0):
        raise PhysicsError("AC Zeeman shift is singular at zero detuning")
    return float(np.sum(s * rabi**2 / (4 * det)))


def phase_error(shift: float, omega_driven: float) -> float:
    """Phase (rad) accumulated over a pi pulse of length 1/(2 omega_driven)."""
    if omega_driven <= 0:
        raise ValueError("omega_driven must be > 0")
    return float(math.pi * shift / omega_driven)


def fidelity_loss(phase_jitter: float) -> float:
    """Order-of-magnitude fidelity loss (delta phi)^2.

    A superposition state would carry an extra factor 1/4; the bare square
    is the convention used for the budget.
    """
    if phase_jitter < 0:
        raise ValueError("phase jitter must be >= 0")
    return float(phase_jitter**2)


# -- spectator channels ---------------------------------------------------------------


@dataclass(frozen=True)
class SpectatorChannel:
    """A transition out of one qubit level other than the qubit itself."""

    qubit_level: str  # "lower" or "upper"
    transition: Transition
    detuning: float  # f_channel - f_qubit, Hz
    element: complex

    @property
    def polarization(self) -> Polarization:
        return self.transition.polarization


def spectator_channels(c: AtomicConstants, qubit: Transition, B: float) -> list[SpectatorChannel]:
    f0 = transition_frequency(c, qubit, B)
    out = []
    lo, up = qubit.lower, qubit.upper
    for dm in (-1, 0, 1):
        m = lo.mF + dm
        if abs(m) <= 3 and HyperfineState(3, m) != up:
            t = Transition(lo, HyperfineState(3, m), Polarization(dm))
            out.append(SpectatorChannel("lower", t, transition_frequency(c, t, B) - f0, dipole_matrix_element(c, t, B)))
    for dm in (-1, 0, 1):
        m = up.mF - dm
        if abs(m) <= 4 and HyperfineState(4, m) != lo:
            t = Transition(HyperfineState(4, m), up, Polarization(dm))
            out.append(SpectatorChannel("upper", t, transition_frequency(c, t, B) - f0, dipole_matrix_element(c, t, B)))
    return out


def _level_off_resonant(channels, fields: Mapping[Polarization, float]) -> dict[str, float]:
    out = {"lower": 0.0, "upper": 0.0}
    for ch in channels:
        out[ch.qubit_level] += off_resonant_error(abs(ch.element) * fields[ch.polarization], ch.detuning)
    return out


def _shift(channels, fields: Mapping[Polarization, float]) -> float:
    return ac_zeeman_shift(
        [abs(ch.element) * fields[ch.polarization] for ch in channels],
        [ch.detuning for ch in channels],
    )


@dataclass(frozen=True)
class SpectatorErrors:
    off_resonant: tuple[float, float]  # (min, max) over relative phase, worst qubit level
    shift_worst: float  # Hz, largest |shift| over relative phases (signed)
    off_resonant_actual: float
    shift_actual: float


def spectator_errors(
    c: AtomicConstants,
    qubit: Transition,
    B: float,
    pair: Sequence[PolarizationComponents],
) -> SpectatorErrors:
    """Off-resonant excitation and AC Zeeman shift on the nulled qubit from
    two electrodes' fields (already scaled by their drive amplitudes).

    Worst and best cases take each spectator polarization's two
    contributions independently in or out of phase.
    """
    channels = spectator_channels(c, qubit, B)
    pols = sorted({ch.polarization for ch in channels}, key=lambda p: p.value)
    p1, p2 = pair
    extremes = {
        pol: (abs(abs(p1.component(pol)) - abs(p2.component(pol))), abs(p1.component(pol)) + abs(p2.component(pol)))
        for pol in pols
    }
    best = _level_off_resonant(channels, {p: extremes[p][0] for p in pols})
    worst = _level_off_resonant(channels, {p: extremes[p][1] for p in pols})
    # min over phases is when every polarization cancels as far as it can
    off_range = (max(best.values()), max(worst.values()))
    shifts = [
        _shift(channels, dict(zip(pols, (extremes[p][k] for p, k in zip(pols, corner)))))
        for corner in itertools.product((0, 1), repeat=len(pols))
    ]
    shift_worst = max(shifts, key=abs)
    actual = {p: abs(p1.component(p) + p2.component(p)) for p in pols}
    return SpectatorErrors(
        (float(off_range[0]), float(off_range[1])),
        float(shift_worst),
        float(max(_level_off_resonant(channels, actual).values())),
        float(_shift(channels, actual)),
    )


# -- report -----------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorBudget:
    qubit: Transition
    B: float
    R: float
    epsilon_spin_flip: float
    epsilon_small_angle: float
    off_resonant_error: tuple[float, float]
    ac_zeeman_shift: float  # Hz, worst case magnitude
    phase_error: float  # rad
    phase_error_stability: float  # rad
    fidelity_loss: float
    total_addressing_error: float
    measured_total_bound: float | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("epsilon_spin_flip", "fidelity_loss", "total_addressing_error"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} is not a probability")

    def rows(self) -> list[tuple[str, float]]:
        lo, hi = self.off_resonant_error
        return [
            ("rabi_ratio_R", self.R),
            ("spin_flip_error", self.epsilon_spin_flip),
            ("spin_flip_error_small_angle", self.epsilon_small_angle),
            ("off_resonant_error_min", lo),
            ("off_resonant_error_max", hi),
            ("ac_zeeman_shift_hz", self.ac_zeeman_shift),
            ("phase_error_rad", self.phase_error),
            ("phase_error_stability_rad", self.phase_error_stability),
            ("fidelity_loss", self.fidelity_loss),
            ("total_addressing_error", self.total_addressing_error),
        ]

    def to_text(self) -> str:
        lines = [f"qubit: {self.qubit}", f"B_gauss: {self.B!r}"]
        lines += [f"{k}: {v!r}" for k, v in self.rows()]
        if self.measured_total_bound is not None:
            lines.append(f"measured_total_bound: {self.measured_total_bound!r}")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def budget_csv(columns: Mapping[str, ErrorBudget]) -> str:
    """Table with one row per metric and one column per budget."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(["metric"] + names)
    metrics = [k for k, _ in next(iter(columns.values())).rows()]
    values = {n: dict(b.rows()) for n, b in columns.items()}
    for m in metrics:
        w.writerow([m] + [repr(float(values[n][m])) for n in names])
    return buf.getvalue()


def assemble_budget(
    c: AtomicConstants,
    qubit: Transition,
    B: float,
    R: float,
    pair: Sequence[PolarizationComponents],
    omega_driven: float,
    stability_fraction: float,
    measured_total_bound: float | None = None,
) -> ErrorBudget:
    """All metrics for ``qubit`` at ``B`` given the nulled-zone fields of the
    two electrodes.

    ``stability_fraction`` is the relative drift of the nulled field; the
    shift, being quadratic in field, drifts by twice that fraction. A
    measured bound on the total error caps the computed sum.
    """
    exact, approx = spin_flip_error(R)
    spec = spectator_errors(c, qubit, B, pair)
    shift = abs(spec.shift_worst)
    phi = phase_error(shift, omega_driven)
    dphi = 2 * stability_fraction * phi
    loss = fidelity_loss(dphi)
    computed = exact + spec.off_resonant[1] + loss
    total = float(computed if measured_total_bound is None else min(measured_total_bound, computed))
    notes = ["fidelity loss uses (delta phi)^2 without the 1/4 superposition factor"]
    if measured_total_bound is not None and measured_total_bound < computed:
        notes.append(f"computed total {computed:.3g} capped by measured bound {measured_total_bound:.3g}")
    return ErrorBudget(
        qubit, B, R, exact, approx, spec.off_resonant, shift, phi, dphi, loss, total,
        measured_total_bound, tuple(notes),
    )


def _scaled(p: PolarizationComponents, k: complex) -> PolarizationComponents:
    return PolarizationComponents(k * p.pi, k * p.sigma_plus, k * p.sigma_minus)


def budget_report(scenario, nulling_result=None, qubit: Transition | None = None, B: float | None = None) -> ErrorBudget:
    """Error budget for ``qubit`` at ``B`` (default: the scenario's own qubit).

    R, the nulling settings and the driven Rabi frequency come from
    ``nulling_result`` when given, else from the scenario's reference R and
    the analytic null of its field map. Projections to other fields reuse
    them unchanged; only detunings and matrix elements are recomputed.
    """
    from .fields import analytic_null

    c = scenario.constants
    qubit = scenario.qubit if qubit is None else qubit
    B = scenario.B if B is None else B
    if not (qubit.lower.F == 4 and qubit.upper.F == 3):
        raise ValueError(f"unknown qubit transition {qubit}")
    x = scenario.crosstalk
    fmap = scenario.field_map
    if nulling_result is not None:
        R = nulling_result.R
        settings = nulling_result.settings
        drv = settings.channel(x.driven_electrode).complex_amplitude
        nul = settings.channel(x.nulling_electrode).complex_amplitude
        omega_driven = nulling_result.omega_driven
    else:
        R = scenario.budget.reference_R
        drv = complex(x.driven_amplitude)
        amp, ph = analytic_null(fmap, x.driven_electrode, x.nulling_electrode, x.nulled_zone,
                                scenario.qubit.polarization, drv)
        nul = amp * np.exp(1j * ph)
        total = _scaled(fmap.components(x.driven_electrode, x.driven_zone), drv)
        other = _scaled(fmap.components(x.nulling_electrode, x.driven_zone), nul)
        own = scenario.qubit
        omega_driven = abs(dipole_matrix_element(c, own, scenario.B)) * abs(
            total.component(own.polarization) + other.component(own.polarization))
    pair = (_scaled(fmap.components(x.driven_electrode, x.nulled_zone), drv),
            _scaled(fmap.components(x.nulling_electrode, x.nulled_zone), nul))
    own_qubit = qubit == scenario.qubit and B == scenario.B
    bound = scenario.budget.measured_total_bound if own_qubit else None
    return assemble_budget(c, qubit, B, R, pair, omega_driven, scenario.budget.stability_fraction, bound)
