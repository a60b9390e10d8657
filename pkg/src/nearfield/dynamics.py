"""Rotating-frame dynamics of the 16-level ground manifold and simulated
Rabi-flop experiments with projection noise and SPAM errors."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .atomic import (
    QUBIT,
    AtomicConstants,
    EigenLevel,
    HyperfineState,
    Polarization,
    all_states,
    breit_rabi_energies,
    dipole_elements,
)
from .drift import DriftProcess, drifted_amplitudes, shot_uniforms
from .errors import PhysicsError
from .fields import DriveSettings, ElectrodeFieldMap, PolarizationComponents

LABELS = tuple(all_states())
INDEX = {s: i for i, s in enumerate(LABELS)}
UPPER = np.array([s.F == 3 for s in LABELS])

#: |drive - hyperfine splitting| beyond which the RWA frame is refused
RWA_LIMIT_HZ = 1e9

#: shot count standing in for the infinite-shot limit in exact scans
EXACT_SHOTS = 2**40


def basis_state(label: HyperfineState | tuple[int, int]) -> np.ndarray:
    psi = np.zeros(len(LABELS), dtype=complex)
    psi[INDEX[HyperfineState(*label) if isinstance(label, tuple) else label]] = 1
    return psi


def check_rwa(constants: AtomicConstants, drive_frequency: float) -> None:
    split = abs(constants.hyperfine_splitting)
    if not abs(drive_frequency - split) < RWA_LIMIT_HZ:
        raise PhysicsError(
            f"drive frequency {drive_frequency:.6g} Hz is more than {RWA_LIMIT_HZ:.0e} Hz "
            f"from the {split:.6g} Hz hyperfine splitting; rotating-wave frame invalid"
        )


@dataclass(frozen=True)
class RotatingFrameHamiltonian:
    """Hermitian matrix in Hz on the (F, mF)-sorted dressed basis."""

    matrix: np.ndarray
    drive_frequency: float
    B: float

    def __post_init__(self):
        h = self.matrix
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
            raise ValueError("Hamiltonian is not Hermitian")
        same = np.equal.outer(UPPER, UPPER)
        off = h[same].copy()
        diag = np.eye(len(LABELS), dtype=bool)[same]
        if np.any(off[~diag] != 0):
            raise ValueError("couplings inside an F manifold are not allowed")


def detuning_diagonal(
    levels: Sequence[EigenLevel], drive_frequency: float, reference: HyperfineState = QUBIT.lower
) -> np.ndarray:
    """Rotating-frame level energies (Hz), ``reference`` at zero."""
    e = np.array([lv.energy - (drive_frequency if lv.label.F == 3 else 0.0) for lv in levels])
    ref = [i for i, lv in enumerate(levels) if lv.label == reference]
    return e - e[ref[0]]


def coupling_matrix(
    levels: Sequence[EigenLevel],
    pol: PolarizationComponents,
    elements: Mapping[tuple[HyperfineState, HyperfineState], complex],
) -> np.ndarray:
    """Lower-left (F=3 row, F=4 column) block entries 1/2 d q-component."""
    n = len(levels)
    out = np.zeros((n, n), dtype=complex)
    idx = {lv.label: i for i, lv in enumerate(levels)}
    for (lo, up), d in elements.items():
        comp = pol.component(Polarization(up.mF - lo.mF))
        out[idx[up], idx[lo]] = 0.5 * d * comp
    return out


def build_hamiltonian(
    levels: Sequence[EigenLevel],
    pol: PolarizationComponents,
    elements: Mapping[tuple[HyperfineState, HyperfineState], complex],
    drive_frequency: float,
    B: float,
    reference: HyperfineState = QUBIT.lower,
    constants: AtomicConstants | None = None,
) -> RotatingFrameHamiltonian:
    if constants is not None:
        check_rwa(constants, drive_frequency)
    else:
        split = np.mean([lv.energy for lv in levels if lv.label.F == 3]) - np.mean(
            [lv.energy for lv in levels if lv.label.F == 4]
        )
        if not abs(drive_frequency - abs(split)) < RWA_LIMIT_HZ:
            raise PhysicsError(f"drive frequency {drive_frequency:.6g} Hz outside the RWA range")
    low = coupling_matrix(levels, pol, elements)
    h = np.diag(detuning_diagonal(levels, drive_frequency, reference)).astype(complex)
    h = h + low + low.conj().T
    return RotatingFrameHamiltonian(h, drive_frequency, B)


def propagate(H: RotatingFrameHamiltonian | np.ndarray, state: np.ndarray, t: float) -> np.ndarray:
    """exp(-i 2 pi H t) applied to ``state``; H in Hz, t in s."""
    if t < 0:
        raise ValueError("t must be >= 0")
    h = H.matrix if isinstance(H, RotatingFrameHamiltonian) else np.asarray(H)
    w, v = np.linalg.eigh(h)
    return v @ (np.exp(-2j * np.pi * w * t) * (v.conj().T @ state))


def two_level_rabi(omega: float, delta: float, t: float) -> float:
    """Upper-state probability for Rabi frequency ``omega`` and detuning
    ``delta`` (both Hz) after time ``t``."""
    if omega < 0 or t < 0:
        raise ValueError("omega and t must be >= 0")
    g2 = omega * omega + delta * delta
    if g2 == 0:
        return 0.0
    return omega * omega / g2 * math.sin(math.pi * math.sqrt(g2) * t) ** 2


# -- state preparation and measurement --------------------------------------------

PUMPED = QUBIT.lower


@dataclass(frozen=True)
class SpamModel:
    """Preparation leak into the other 15 levels (uniformly), an optional
    swap pulse from the optically pumped state to ``prepared``, and a 2x2
    readout confusion matrix on the dark/bright classes."""

    prep_error: float = 0.0
    p_dark_given_dark: float = 1.0
    p_dark_given_bright: float = 0.0
    dark_states: frozenset = frozenset({PUMPED})
    prepared: HyperfineState = PUMPED
    swap_error: float = 0.0

    def __post_init__(self):
        for name in ("prep_error", "p_dark_given_dark", "p_dark_given_bright", "swap_error"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        object.__setattr__(
            self,
            "dark_states",
            frozenset(HyperfineState(*s) if isinstance(s, tuple) else s for s in self.dark_states),
        )
        if isinstance(self.prepared, tuple):
            object.__setattr__(self, "prepared", HyperfineState(*self.prepared))

    @property
    def confusion(self) -> np.ndarray:
        """Rows: true class (dark, bright); columns: outcome (dark, bright)."""
        return np.array(
            [
                [self.p_dark_given_dark, 1 - self.p_dark_given_dark],
                [self.p_dark_given_bright, 1 - self.p_dark_given_bright],
            ]
        )

    @property
    def initial_dark(self) -> bool:
        return self.prepared in self.dark_states

    def initial_weights(self) -> np.ndarray:
        """Exact distribution over starting levels (after any swap)."""
        w = np.full(len(LABELS), self.prep_error / (len(LABELS) - 1))
        w[INDEX[PUMPED]] = 1 - self.prep_error
        if self.prepared != PUMPED:
            i, j = INDEX[PUMPED], INDEX[self.prepared]
            wi, wj = w[i], w[j]
            s = self.swap_error
            w[i] = s * wi + (1 - s) * wj
            w[j] = s * wj + (1 - s) * wi
        return w

    def sample_initial(self, u: np.ndarray) -> np.ndarray:
        """Starting level index per shot from uniforms u[:, 0], u[:, 1], u[:, 3]."""
        n = len(LABELS)
        start = np.full(u.shape[0], INDEX[PUMPED])
        leak = u[:, 0] < self.prep_error
        others = np.array([i for i in range(n) if i != INDEX[PUMPED]])
        start[leak] = others[np.minimum((u[leak, 1] * (n - 1)).astype(int), n - 2)]
        if self.prepared != PUMPED:
            i, j = INDEX[PUMPED], INDEX[self.prepared]
            ok = u[:, 3] >= self.swap_error
            at_i, at_j = start == i, start == j
            start[ok & at_i] = j
            start[ok & at_j] = i
        return start

    def outcome_probability(self, p_dark_class: np.ndarray) -> np.ndarray:
        return self.p_dark_given_dark * p_dark_class + self.p_dark_given_bright * (1 - p_dark_class)


# -- experiments --------------------------------------------------------------------


@dataclass(frozen=True)
class ZoneEnv:
    """An ion in ``zone`` of a trap described by ``field_map`` at field ``B``."""

    constants: AtomicConstants
    field_map: ElectrodeFieldMap
    zone: str
    B: float
    drift: DriftProcess | None = None
    shot_period: float = 0.01  # s between consecutive shots
    reference: HyperfineState = QUBIT.lower

    def levels(self) -> list[EigenLevel]:
        return breit_rabi_energies(self.constants, self.B)

    def unit_couplings(self, electrodes: Iterable[int]) -> np.ndarray:
        """Coupling block per electrode at unit drive, shape (n_e, 16, 16)."""
        levels = self.levels()
        elements = dipole_elements(self.constants, self.B)
        return np.array(
            [coupling_matrix(levels, self.field_map.components(e, self.zone), elements) for e in electrodes]
        )


@dataclass(frozen=True)
class Pulse:
    drives: DriveSettings
    duration: float
    frequency: float


@dataclass
class RabiScan:
    durations: np.ndarray
    shots_per_point: int
    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.durations = np.asarray(self.durations, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.durations.shape != self.counts.shape:
            raise ValueError("durations and counts differ in length")
        if np.any(self.counts < 0) or np.any(self.counts > self.shots_per_point):
            raise ValueError("counts must lie in [0, shots_per_point]")

    @property
    def initial_dark(self) -> bool:
        return bool(self.metadata.get("initial_dark", True))

    @property
    def dark_fraction(self) -> np.ndarray:
        return self.counts / self.shots_per_point

    @property
    def transferred_fraction(self) -> np.ndarray:
        """Fraction that left the prepared class; starts near zero."""
        f = self.dark_fraction
        return 1 - f if self.initial_dark else f

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["duration_s", "dark_count", "shots"])
        for t, k in zip(self.durations, self.counts):
            w.writerow([repr(float(t)), int(k), self.shots_per_point])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, initial_dark: bool = True) -> "RabiScan":
        rows = list(csv.DictReader(io.StringIO(text)))
        shots = {int(r["shots"]) for r in rows}
        if len(shots) != 1:
            raise ValueError("mixed shot counts in scan CSV")
        return cls(
            np.array([float(r["duration_s"]) for r in rows]),
            shots.pop(),
            np.array([int(r["dark_count"]) for r in rows]),
            {"initial_dark": initial_dark},
        )


def _dark_class_probability(
    env: ZoneEnv,
    drives: DriveSettings,
    frequency: float,
    spam: SpamModel,
    durations: np.ndarray,
    times: np.ndarray,
    shot_indices: np.ndarray,
    starts: np.ndarray | None,
    couplings: np.ndarray,
) -> np.ndarray:
    """Per-shot dark-class population. ``starts`` None means the exact
    average over ``spam.initial_weights()``."""
    diag = detuning_diagonal(env.levels(), frequency, env.reference)
    dark = np.array(sorted(INDEX[s] for s in spam.dark_states))
    g = drifted_amplitudes(drives, env.drift, times, shot_indices)
    shared = env.drift is None or env.drift.is_static(drives.electrodes)
    rows = g[:1] if shared else g
    low = np.einsum("nc,cij->nij", rows, couplings)
    h = low + low.conj().transpose(0, 2, 1)
    h[:, np.arange(len(LABELS)), np.arange(len(LABELS))] += diag
    w, v = np.linalg.eigh(h)
    if shared:
        w = np.broadcast_to(w, (durations.size, w.shape[1]))
        v = np.broadcast_to(v, (durations.size,) + v.shape[1:])
    phase = np.exp(-2j * np.pi * w * durations[:, None])
    vd = v[:, dark, :]
    if starts is not None:
        coef = phase * v[np.arange(durations.size), starts, :].conj()
        amp = np.einsum("ndk,nk->nd", vd, coef)
        return np.sum(np.abs(amp) ** 2, axis=1)
    weights = spam.initial_weights()
    total = np.zeros(durations.size)
    for s in np.flatnonzero(weights):
        coef = phase * v[:, s, :].conj()
        amp = np.einsum("ndk,nk->nd", vd, coef)
        total += weights[s] * np.sum(np.abs(amp) ** 2, axis=1)
    return total


def simulate_shot(env: ZoneEnv, pulse: Pulse, spam: SpamModel, shot_index: int, t: float | None = None) -> bool:
    """One prepare-pulse-measure cycle; True for a dark outcome.

    Deterministic in (drift seed, shot_index, t).
    """
    if t is None:
        t = shot_index * env.shot_period
    check_rwa(env.constants, pulse.frequency)
    seed = env.drift.seed if env.drift is not None else 0
    u = shot_uniforms(seed, [shot_index])
    starts = spam.sample_initial(u)
    couplings = env.unit_couplings(pulse.drives.electrodes)
    p = _dark_class_probability(
        env, pulse.drives, pulse.frequency, spam, np.array([pulse.duration]),
        np.array([t]), np.array([shot_index]), starts, couplings,
    )
    return bool(u[0, 2] < spam.outcome_probability(p)[0])


def scan_pulse_duration(
    env: ZoneEnv,
    drives: DriveSettings,
    frequency: float,
    spam: SpamModel,
    durations: Sequence[float],
    shots_per_point: int = 200,
    *,
    first_shot: int = 0,
    t_start: float = 0.0,
    exact: bool = False,
    workers: int = 1,
    chunk: int = 2048,
) -> RabiScan:
    """Pulse-duration scan, shots taken point by point in duration order.

    Shot j of point i has index ``first_shot + i*shots + j`` and fires at
    ``t_start + (i*shots + j) * env.shot_period``. With ``exact`` the counts
    are the expected values at ``EXACT_SHOTS`` shots per point.
    """
    durations = np.asarray(durations, dtype=float)
    if durations.size == 0:
        raise ValueError("empty duration list")
    if np.any(np.diff(durations) < 0):
        raise ValueError("durations must be sorted ascending")
    if np.any(durations < 0):
        raise ValueError("durations must be >= 0")
    check_rwa(env.constants, frequency)
    couplings = env.unit_couplings(drives.electrodes)
    meta = {
        "zone": env.zone,
        "B_G": env.B,
        "drive_frequency_hz": frequency,
        "drives": [(c.electrode, c.amplitude, c.phase, c.on) for c in drives.channels],
        "first_shot": first_shot,
        "t_start_s": t_start,
        "initial_dark": spam.initial_dark,
        "exact": exact,
    }
    seed = env.drift.seed if env.drift is not None else 0

    if exact:
        offsets = np.arange(durations.size) * shots_per_point
        p = _dark_class_probability(
            env, drives, frequency, spam, durations, t_start + offsets * env.shot_period,
            first_shot + offsets, None, couplings,
        )
        q = spam.outcome_probability(p)
        counts = np.rint(np.clip(q, 0, 1) * EXACT_SHOTS).astype(np.int64)
        return RabiScan(durations, EXACT_SHOTS, counts, meta)

    n = durations.size * shots_per_point
    offsets = np.arange(n)
    all_t = np.repeat(durations, shots_per_point)

    def run(sl: slice) -> np.ndarray:
        idx = first_shot + offsets[sl]
        u = shot_uniforms(seed, idx)
        starts = spam.sample_initial(u)
        p = _dark_class_probability(
            env, drives, frequency, spam, all_t[sl], t_start + offsets[sl] * env.shot_period,
            idx, starts, couplings,
        )
        return u[:, 2] < spam.outcome_probability(p)

    slices = [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, slices))
    else:
        parts = [run(s) for s in slices]
    dark = np.concatenate(parts).reshape(durations.size, shots_per_point)
    return RabiScan(durations, shots_per_point, dark.sum(axis=1), meta)
