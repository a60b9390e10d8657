"""Experimental nulling procedures on simulated scans.

Every measurement is a pulse-duration scan fitted with
:func:`nearfield.fitting.estimate_rabi`; the optimizer only sees fitted Rabi
frequencies, never the field map.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .atomic import QUBIT, Polarization, Transition, dipole_matrix_element, transition_frequency
from .dynamics import RabiScan, SpamModel, ZoneEnv, scan_pulse_duration
from .errors import ConvergenceError
from .fields import DriveChannel, DriveSettings, polarization_decompose, rabi_frequency, total_field
from .fitting import FitResult, estimate_rabi

TWO_PI = 2 * math.pi
SIGMA_PLUS_TARGET = Transition.between((4, 0), (3, 1))
SIGMA_MINUS_PROBE = Transition.between((4, 1), (3, 0))


@dataclass(frozen=True)
class OptimizerParams:
    phase_tol: float = 1e-3  # rad
    amplitude_rel_tol: float = 1e-4
    max_evaluations: int = 60
    points: int = 16  # durations per objective scan
    shots: int = 100  # shots per duration
    flops: float = 1.5  # objective scan length in expected flops
    min_span: float = 1e-5  # s
    max_span: float = 0.1  # s
    initial_phase_step: float = 0.5  # rad
    initial_amplitude_step: float = 0.3  # relative
    max_amplitude: float = 10.0
    verify_points: int = 32
    verify_shots: int = 200
    verify_flops: float = 3.0
    verify_max_span: float = 0.1  # s
    diverge_fraction: float = 0.5
    exact: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.max_evaluations < 4:
            raise ValueError("max_evaluations must be >= 4")
        if self.points < 8 or self.verify_points < 8:
            raise ValueError("scans need at least 8 durations")
        if not 0 < self.min_span <= self.max_span:
            raise ValueError("need 0 < min_span <= max_span")


@dataclass(frozen=True)
class Probe:
    """A measurement: transition ``transition`` in ``env.zone`` driven at
    ``frequency`` with state preparation and readout ``spam``."""

    env: ZoneEnv
    transition: Transition
    frequency: float
    spam: SpamModel

    def expected_rabi(self, drives: DriveSettings) -> float:
        """Static-field prediction, used only to size scan spans."""
        env = self.env
        comp = polarization_decompose(total_field(env.field_map, drives, env.zone), env.field_map.quantization_axis)
        return rabi_frequency(comp, self.transition, dipole_matrix_element(env.constants, self.transition, env.B))


class ShotClock:
    """Hands out consecutive shot indices; shot k fires at k * period."""

    def __init__(self, period: float, shot: int = 0):
        self.period = period
        self.shot = shot

    def take(self, n: int) -> tuple[int, float]:
        first = self.shot
        self.shot += n
        return first, first * self.period

    def jump_to(self, t: float) -> None:
        k = int(math.ceil(t / self.period - 1e-9))
        if k < self.shot:
            raise ValueError("cannot move the shot clock backwards")
        self.shot = k


GOLDEN = (math.sqrt(5) - 1) / 2

#: evaluations needed before the field model guards against aliasing
PREDICT_MIN_POINTS = 5
#: Hz, keeps near-null points from dominating the relative-weight fit
PREDICT_FLOOR_HZ = 50.0


def scan_durations(span: float, points: int) -> np.ndarray:
    """Ascending durations in (0, span], one per equal cell at a golden-ratio
    offset within the cell, so no rotation frequency is sampled
    stroboscopically."""
    k = np.arange(points)
    return span * (k + 1 - (k * GOLDEN) % 1.0 * 0.5) / points


def _scan(probe: Probe, drives, span, points, shots, clock: ShotClock, params: OptimizerParams) -> RabiScan:
    durations = scan_durations(span, points)
    first, t0 = clock.take(points * shots)
    return scan_pulse_duration(
        probe.env, drives, probe.frequency, probe.spam, durations, shots,
        first_shot=first, t_start=t0, exact=params.exact, workers=params.workers,
    )


def _span(omega: float, flops: float, params: OptimizerParams, max_span: float | None = None) -> float:
    hi = params.max_span if max_span is None else max_span
    if omega <= 0 or not math.isfinite(omega):
        return hi
    return float(np.clip(flops / omega, params.min_span, hi))


@dataclass(frozen=True)
class NullingTask:
    """Null the ``nulled`` probe by adjusting ``nulling_electrode`` while
    ``base`` drives everything else. ``driven`` is the denominator of R.
    ``reference`` with ``reference_drives`` fixes contrast and offset for the
    objective fits."""

    kind: str
    nulled: Probe
    driven: Probe
    reference: Probe
    base: DriveSettings
    reference_drives: DriveSettings
    nulling_electrode: int

    def settings(self, amplitude: float, phase: float) -> DriveSettings:
        return self.base.with_channel(self.nulling_electrode, amplitude, phase)


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    phase: float
    amplitude: float
    omega: float


@dataclass(frozen=True)
class NullingResult:
    kind: str
    settings: DriveSettings
    nulling_electrode: int
    omega_nulled: float
    omega_driven: float
    omega_nulled_std: float
    omega_driven_std: float
    iterations: int
    history: tuple[TraceRow, ...]
    diverged: bool
    nulled_span: float  # s, verification scan length in the nulled zone
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.omega_nulled < 0 or self.omega_driven < 0:
            raise ValueError("Rabi frequencies must be >= 0")

    @property
    def R(self) -> float:
        if self.omega_driven == 0:
            return math.inf
        return self.omega_nulled / self.omega_driven

    @property
    def amplitude(self) -> float:
        return self.settings.channel(self.nulling_electrode).amplitude

    @property
    def phase(self) -> float:
        return self.settings.channel(self.nulling_electrode).phase

    def to_text(self) -> str:
        rows = [
            ("kind", self.kind),
            ("nulling_electrode", self.nulling_electrode),
            ("amplitude", repr(self.amplitude)),
            ("phase_rad", repr(self.phase)),
            ("omega_nulled_hz", repr(self.omega_nulled)),
            ("omega_nulled_std_hz", repr(self.omega_nulled_std)),
            ("omega_driven_hz", repr(self.omega_driven)),
            ("omega_driven_std_hz", repr(self.omega_driven_std)),
            ("R", repr(self.R)),
            ("iterations", self.iterations),
            ("diverged", str(self.diverged).lower()),
            ("nulled_span_s", repr(self.nulled_span)),
            ("channels", ";".join(f"{c.electrode},{c.amplitude!r},{c.phase!r},{int(c.on)}" for c in self.settings.channels)),
        ]
        rows += [(k, v) for k, v in sorted(self.context.items())]
        return "".join(f"{k}: {v}\n" for k, v in rows)

    @classmethod
    def from_text(cls, text: str) -> "NullingResult":
        kv = {}
        for line in text.splitlines():
            if line.strip():
                k, _, v = line.partition(":")
                kv[k.strip()] = v.strip()
        chans = []
        for part in kv.pop("channels").split(";"):
            e, a, p, on = part.split(",")
            chans.append(DriveChannel(int(e), float(a), float(p), bool(int(on))))
        known = {"kind", "nulling_electrode", "amplitude", "phase_rad", "omega_nulled_hz", "omega_nulled_std_hz",
                 "omega_driven_hz", "omega_driven_std_hz", "R", "iterations", "diverged", "nulled_span_s"}
        return cls(
            kind=kv["kind"],
            settings=DriveSettings(tuple(chans)),
            nulling_electrode=int(kv["nulling_electrode"]),
            omega_nulled=float(kv["omega_nulled_hz"]),
            omega_driven=float(kv["omega_driven_hz"]),
            omega_nulled_std=float(kv["omega_nulled_std_hz"]),
            omega_driven_std=float(kv["omega_driven_std_hz"]),
            iterations=int(kv["iterations"]),
            history=(),
            diverged=kv["diverged"] == "true",
            nulled_span=float(kv["nulled_span_s"]),
            context={k: v for k, v in kv.items() if k not in known},
        )

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "phase_rad", "amplitude", "omega_hz"])
        for r in self.history:
            w.writerow([r.iteration, repr(r.phase), repr(r.amplitude), repr(r.omega)])
        return buf.getvalue()


@dataclass(frozen=True)
class DriftRecord:
    t: np.ndarray
    R: np.ndarray
    R_std: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("drift record times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        object.__setattr__(self, "R_std", np.asarray(self.R_std, dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_s", "R"])
        for t, r in zip(self.t, self.R):
            w.writerow([repr(float(t)), repr(float(r))])
        return buf.getvalue()


# -- measurement ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Ref:
    contrast: float
    offset: float


def _reference(task: NullingTask, clock: ShotClock, params: OptimizerParams) -> tuple[FitResult, _Ref]:
    probe = task.reference
    om = probe.expected_rabi(task.reference_drives)
    span = _span(om, params.verify_flops, params, params.verify_max_span)
    fit = estimate_rabi(_scan(probe, task.reference_drives, span, params.verify_points, params.verify_shots, clock, params))
    if not fit.converged:
        raise ConvergenceError("reference scan shows no Rabi oscillation")
    return fit, _Ref(fit.contrast, fit.offset)


class _Objective:
    """Fitted nulled-zone Rabi frequency at given nulling settings."""

    def __init__(self, task: NullingTask, ref: _Ref, clock: ShotClock, params: OptimizerParams):
        self.task, self.ref, self.clock, self.params = task, ref, clock, params
        self.history: list[TraceRow] = []
        self.expected = math.nan
        self.best: tuple[float, float, float] | None = None  # (omega, amplitude, phase)
        self.accepted: list[tuple[float, float, float]] = []  # (amplitude, phase, omega)

    @property
    def remaining(self) -> int:
        return self.params.max_evaluations - len(self.history)

    def predict(self, amplitude: float, phase: float) -> float:
        """Rabi frequency expected from the accepted evaluations, or nan.

        For a static field Omega^2 = c0 + c1 a^2 + a (c2 cos phi + c3 sin phi)
        exactly; the coefficients are fitted with relative weights.
        """
        if len(self.accepted) < PREDICT_MIN_POINTS:
            return math.nan
        a, ph, om = (np.array(v) for v in zip(*self.accepted))
        X = np.column_stack([np.ones_like(a), a * a, a * np.cos(ph), a * np.sin(ph)])
        w = 1 / (om * om + PREDICT_FLOOR_HZ**2)
        coef, *_ = np.linalg.lstsq(X * w[:, None], om * om * w, rcond=None)
        x = np.array([1.0, amplitude**2, amplitude * math.cos(phase), amplitude * math.sin(phase)])
        return math.sqrt(max(float(x @ coef), 0.0))

    def _fit(self, drives, span, amplitude, phase) -> tuple[float, float]:
        p = self.params
        scan = _scan(self.task.nulled, drives, span, p.points, p.shots, self.clock, p)
        fit = estimate_rabi(scan, contrast=self.ref.contrast, offset=self.ref.offset, fit_decay=False)
        self.history.append(TraceRow(len(self.history), phase, amplitude, fit.omega))
        y = (scan.transferred_fraction - self.ref.offset) / self.ref.contrast
        excess = np.mean(y) - np.mean(np.sin(np.pi * fit.omega * scan.durations) ** 2)
        return fit.omega, float(excess)

    def __call__(self, amplitude: float, phase: float) -> float:
        """Squared fitted Rabi frequency; every scan is recorded."""
        p = self.params
        amplitude = float(np.clip(amplitude, 0.0, p.max_amplitude))
        phase = float(phase) % TWO_PI
        drives = self.task.settings(amplitude, phase)
        span = _span(self.expected, p.flops, p)
        om, level = self._fit(drives, span, amplitude, phase)
        pred = self.predict(amplitude, phase)
        # rescan while the span is badly matched: far more transfer than the
        # fit explains, or far less rotation than the field model predicts
        # on a span that model says aliases, means aliasing; otherwise
        # resize to ~``flops`` flops
        while self.remaining > 0:
            if pred * span > 4 and om < pred / 4:
                span = _span(pred, p.flops, p)
                pred = math.nan  # once per call; a short scan is trusted
            elif level > 0.15 and span > p.min_span:
                span = max(span / 8, p.min_span)
            elif (om * span < 0.4 and span < p.max_span) or om * span > 4:
                new = _span(om, p.flops, p)
                if new == span:
                    break
                span = new
            else:
                break
            om, level = self._fit(drives, span, amplitude, phase)
        self.accepted.append((amplitude, phase, om))
        if self.best is None or om < self.best[0]:
            self.best = (om, amplitude, phase)
        if om > 0:
            self.expected = om
        return om * om


def _wrap(x: float) -> float:
    return (x + math.pi) % TWO_PI - math.pi


def _coordinate_descent(obj: _Objective, a: float, phi: float) -> tuple[float, float]:
    """Alternating three-point line fits: a sinusoid in phase and a parabola
    in amplitude, both exact for a static linear field model."""
    p = obj.params
    h, s = p.initial_phase_step, p.initial_amplitude_step
    budget = max(4, (2 * p.max_evaluations) // 3)
    while len(obj.history) + 6 <= budget:
        f0 = obj(a, phi)
        fm, fp = obj(a, phi - h), obj(a, phi + h)
        C = (fp - fm) / (2 * math.sin(h))
        B = (f0 - (fp + fm) / 2) / (1 - math.cos(h))
        move = 0.0
        if math.hypot(B, C) > 0:
            move = _wrap(math.atan2(-C, -B))
            move = float(np.clip(move, -3 * h, 3 * h))
        phi = (phi + move) % TWO_PI
        h = min(h, max(2 * abs(move), p.phase_tol))

        da = s * a if a > 0 else s
        g0 = obj(a, phi)
        gm, gp = obj(max(a - da, 0.0), phi), obj(a + da, phi)
        curv = gp + gm - 2 * g0
        if curv > 0:
            step = -da * (gp - gm) / (2 * curv)
        else:
            step = (-da, 0.0, da)[int(np.argmin([gm, g0, gp]))]
        step = float(np.clip(step, -3 * da, 3 * da))
        new_a = float(np.clip(a + step, 0.0, p.max_amplitude))
        rel = abs(new_a - a) / a if a > 0 else abs(new_a - a)
        a = new_a
        s = min(s, max(2 * rel, p.amplitude_rel_tol))
        if abs(move) < p.phase_tol and rel < p.amplitude_rel_tol:
            break
    return a, phi


def _polish(obj: _Objective, a: float, phi: float) -> None:
    p = obj.params
    if obj.remaining < 3 or a <= 0:
        return
    scale_a = max(p.amplitude_rel_tol * 10, 1e-6)
    scale_p = max(p.phase_tol * 10, 1e-6)
    simplex = np.array([[phi, math.log(a)], [phi + scale_p, math.log(a)], [phi, math.log(a) + scale_a]])

    def f(x):
        if obj.remaining <= 0:
            return math.inf
        return obj(math.exp(x[1]), x[0])

    minimize(f, simplex[0], method="Nelder-Mead", options={
        "maxfev": obj.remaining, "initial_simplex": simplex,
        "xatol": min(p.phase_tol, p.amplitude_rel_tol), "fatol": 0.0,
    })


def verify(
    task: NullingTask,
    settings: DriveSettings,
    ref: tuple[float, float],
    clock: ShotClock,
    params: OptimizerParams,
    nulled_span: float,
    points: int | None = None,
    shots: int | None = None,
) -> tuple[FitResult, FitResult]:
    """Scans in the driven then the nulled zone at fixed settings, by
    default at the verification size.

    The nulled fit takes contrast and offset from the driven fit when both
    probes share state preparation, else from ``ref``.
    """
    p = params
    points = points or p.verify_points
    shots = shots or p.verify_shots
    span_d = _span(task.driven.expected_rabi(settings), p.verify_flops, p, p.verify_max_span)
    fd = estimate_rabi(_scan(task.driven, settings, span_d, points, shots, clock, p))
    c, o = (fd.contrast, fd.offset) if task.driven.spam == task.nulled.spam and fd.converged else ref
    scan = _scan(task.nulled, settings, nulled_span, points, shots, clock, p)
    return fd, estimate_rabi(scan, contrast=c, offset=o)


def _run(task: NullingTask, initial: tuple[float, float], params: OptimizerParams, clock: ShotClock) -> NullingResult:
    ref_fit, ref = _reference(task, clock, params)
    obj = _Objective(task, ref, clock, params)
    obj.expected = ref_fit.omega
    a0, phi0 = initial
    a, phi = _coordinate_descent(obj, float(a0), float(phi0) % TWO_PI)
    _polish(obj, a, phi)
    om_best, a_best, phi_best = obj.best
    om_init = obj.history[0].omega
    diverged = not (math.isfinite(om_best) and om_best <= params.diverge_fraction * om_init)
    settings = task.settings(a_best, phi_best)

    span_n = _span(om_best, params.verify_flops / 2, params, params.verify_max_span)
    fd, fn = verify(task, settings, (ref.contrast, ref.offset), clock, params, span_n)
    return NullingResult(
        kind=task.kind,
        settings=settings,
        nulling_electrode=task.nulling_electrode,
        omega_nulled=fn.omega,
        omega_driven=fd.omega,
        omega_nulled_std=fn.omega_std,
        omega_driven_std=fd.omega_std,
        iterations=len(obj.history),
        history=tuple(obj.history),
        diverged=diverged,
        nulled_span=span_n,
        context={
            "reference_omega_hz": repr(ref_fit.omega),
            "reference_contrast": repr(ref.contrast),
            "reference_offset": repr(ref.offset),
            "nulled_decay_time_s": repr(fn.decay_time),
            "last_shot": clock.shot,
        },
    )


# -- procedures -----------------------------------------------------------------------


def crosstalk_task(
    env: ZoneEnv,
    driven_electrode: int,
    nulling_electrode: int,
    nulled_zone: str,
    spam: SpamModel,
    *,
    driven_amplitude: float = 1.0,
    initial: tuple[float, float] = (0.0, 0.0),
    qubit: Transition = QUBIT,
    frequency: float | None = None,
) -> NullingTask:
    fmap = env.field_map
    for e in (driven_electrode, nulling_electrode):
        if e not in fmap.electrodes:
            raise KeyError(f"electrode {e} is not in the field map")
    if nulled_zone not in fmap.zones or nulled_zone == env.zone:
        raise ValueError(f"nulled zone {nulled_zone!r} must be a map zone other than {env.zone!r}")
    if frequency is None:
        frequency = transition_frequency(env.constants, qubit, env.B)
    driven = Probe(env, qubit, frequency, spam)
    nulled = Probe(replace(env, zone=nulled_zone), qubit, frequency, spam)
    base = DriveSettings((DriveChannel(driven_electrode, driven_amplitude, 0.0),
                          DriveChannel(nulling_electrode, initial[0], initial[1])))
    return NullingTask("crosstalk", nulled, driven, driven, base, base, nulling_electrode)


def null_crosstalk(
    env: ZoneEnv,
    driven_electrode: int,
    nulling_electrode: int,
    nulled_zone: str,
    params: OptimizerParams = OptimizerParams(),
    *,
    spam: SpamModel = SpamModel(),
    driven_amplitude: float = 1.0,
    initial: tuple[float, float] = (0.5, 0.0),
    qubit: Transition = QUBIT,
    frequency: float | None = None,
    clock: ShotClock | None = None,
) -> NullingResult:
    """Minimize the fitted Rabi frequency in ``nulled_zone`` over the nulling
    channel's (amplitude, phase) while ``driven_electrode`` drives
    ``env.zone``, then verify at fixed settings."""
    task = crosstalk_task(env, driven_electrode, nulling_electrode, nulled_zone, spam,
                          driven_amplitude=driven_amplitude, initial=initial, qubit=qubit, frequency=frequency)
    clock = clock or ShotClock(env.shot_period)
    return _run(task, initial, params, clock)


def polarization_task(
    env: ZoneEnv,
    electrodes: tuple[int, int],
    spam: SpamModel,
    *,
    fixed_amplitude: float = 1.0,
    initial: tuple[float, float] = (0.0, 0.0),
    target: Transition = SIGMA_PLUS_TARGET,
    probe: Transition = SIGMA_MINUS_PROBE,
) -> NullingTask:
    fixed, nulling = electrodes
    fmap = env.field_map
    for e in electrodes:
        if e not in fmap.electrodes:
            raise KeyError(f"electrode {e} is not in the field map")
    if fixed == nulling:
        raise ValueError("polarization nulling needs two distinct electrodes")
    if target.polarization is not Polarization.SIGMA_PLUS:
        raise ValueError("polarization target must be a sigma+ transition")
    frequency = transition_frequency(env.constants, target, env.B)
    target_spam = replace(spam, prepared=target.lower, dark_states=frozenset({target.lower}))
    # the probe starts in its upper level, reached by a swap from the pumped state
    probe_spam = replace(spam, prepared=probe.upper, dark_states=frozenset({probe.upper}))
    nulled = Probe(env, target, frequency, target_spam)
    driven = Probe(env, probe, frequency, probe_spam)
    base = DriveSettings((DriveChannel(fixed, fixed_amplitude, 0.0), DriveChannel(nulling, initial[0], initial[1])))
    ref_drives = DriveSettings((DriveChannel(fixed, fixed_amplitude, 0.0),))
    return NullingTask("polarization", nulled, driven, nulled, base, ref_drives, nulling)


def null_polarization(
    env: ZoneEnv,
    electrodes: tuple[int, int],
    params: OptimizerParams = OptimizerParams(),
    *,
    spam: SpamModel = SpamModel(),
    fixed_amplitude: float = 1.0,
    initial: tuple[float, float] = (0.5, 0.0),
    target: Transition = SIGMA_PLUS_TARGET,
    probe: Transition = SIGMA_MINUS_PROBE,
    clock: ShotClock | None = None,
) -> NullingResult:
    """Null the sigma+ Rabi frequency of ``target`` in ``env.zone`` using the
    second electrode of ``electrodes``; both pulses stay resonant with the
    sigma+ line. R is Omega_sigma+ / Omega_sigma-, the latter measured on
    ``probe`` after swapping the population into its upper level."""
    task = polarization_task(env, electrodes, spam, fixed_amplitude=fixed_amplitude, initial=initial,
                             target=target, probe=probe)
    clock = clock or ShotClock(env.shot_period)
    return _run(task, initial, params, clock)


def monitor_drift(
    task: NullingTask,
    result: NullingResult,
    duration: float,
    sample_interval: float,
    params: OptimizerParams = OptimizerParams(),
    *,
    start: float | None = None,
) -> DriftRecord:
    """Measure R every ``sample_interval`` seconds for ``duration`` seconds at
    the fixed settings of ``result``; the settings are never touched.

    Each sample uses objective-sized scans (``params.points`` x
    ``params.shots``) in both zones; a sample that cannot start on time
    starts as soon as the previous one ends.
    """
    if sample_interval <= 0 or duration < 0:
        raise ValueError("need sample_interval > 0 and duration >= 0")
    period = task.nulled.env.shot_period
    t0 = start if start is not None else int(result.context.get("last_shot", 0)) * period
    clock = ShotClock(period, int(math.ceil(t0 / period)))
    t0 = clock.shot * period
    ref = (float(result.context.get("reference_contrast", "nan")),
           float(result.context.get("reference_offset", "nan")))
    ts, rs, ss = [], [], []
    for k in range(int(math.floor(duration / sample_interval + 1e-9)) + 1):
        clock.jump_to(max(t0 + k * sample_interval, clock.shot * period))
        t = clock.shot * period
        fd, fn = verify(task, result.settings, ref, clock, params, result.nulled_span, params.points, params.shots)
        r = fn.omega / fd.omega if fd.omega > 0 else math.inf
        std = r * math.hypot(fn.omega_std / fn.omega if fn.omega > 0 else 0.0,
                             fd.omega_std / fd.omega if fd.omega > 0 else 0.0)
        if fn.omega == 0:
            std = fn.omega_std / fd.omega if fd.omega > 0 else math.inf
        ts.append(t - t0)
        rs.append(r)
        ss.append(std)
    return DriftRecord(np.array(ts), np.array(rs), np.array(ss))
