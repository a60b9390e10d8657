"""Slow drift and shot-to-shot jitter of the drive channels.

Each channel's phase and log-amplitude carry an Ornstein-Uhlenbeck drift
plus independent Gaussian jitter per shot. All randomness is counter based
(Philox keyed on seed, stream and channel), so a sample depends only on its
coordinates and never on evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.signal import lfilter
from scipy.special import ndtri

from .fields import DriveChannel, DriveSettings

STREAM_OU = 1
STREAM_JITTER = 2
STREAM_SHOT = 3

_PHASE, _LOGAMP = 0, 1


@dataclass(frozen=True)
class OUParams:
    relaxation_time: float = 0.0  # s
    stationary_std: float = 0.0
    jitter_std: float = 0.0

    def __post_init__(self):
        for name in ("relaxation_time", "stationary_std", "jitter_std"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class ChannelDrift:
    phase: OUParams = OUParams()
    log_amplitude: OUParams = OUParams()

    @property
    def static(self) -> bool:
        return all(
            p.stationary_std == 0 and p.jitter_std == 0 for p in (self.phase, self.log_amplitude)
        )


@dataclass(frozen=True)
class DriftProcess:
    default: ChannelDrift = ChannelDrift()
    overrides: Mapping[int, ChannelDrift] = field(default_factory=dict)
    seed: int = 0
    knot_interval: float = 1.0  # s, spacing of the exact OU samples

    def __post_init__(self):
        if not self.knot_interval > 0:
            raise ValueError("knot_interval must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def __hash__(self):
        return hash((self.default, tuple(sorted(self.overrides.items())), self.seed, self.knot_interval))

    def channel(self, electrode: int) -> ChannelDrift:
        return self.overrides.get(electrode, self.default)

    def is_static(self, electrodes) -> bool:
        return all(self.channel(e).static for e in electrodes)


def stream_key(seed: int, *coords: int) -> np.ndarray:
    return SeedSequence([seed, *coords]).generate_state(2, np.uint64)


def counter_uniforms(key: np.ndarray, indices) -> np.ndarray:
    """Four uniforms in (0, 1) for each counter in ``indices``; shape (n, 4).

    Row i depends only on (key, indices[i]).
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    out = np.empty((idx.size, 4))
    if idx.size == 0:
        return out
    if np.any(idx < 0):
        raise ValueError("counter indices must be non-negative")
    order = np.argsort(idx, kind="stable")
    sidx = idx[order]
    # contiguous runs share one generator
    breaks = np.flatnonzero(np.diff(sidx) != 1) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [sidx.size]))
    rows = np.empty((sidx.size, 4))
    for s, e in zip(starts, ends):
        bitgen = Philox(key=key)
        bitgen.advance(int(sidx[s]))
        rows[s:e] = Generator(bitgen).random(4 * (e - s)).reshape(e - s, 4)
    out[order] = rows
    # keep away from exactly 0 so ndtri stays finite
    return np.clip(out, 2.0**-54, 1 - 2.0**-53)


@lru_cache(maxsize=64)
def _ou_knots(seed: int, electrode: int, kind: int, params: OUParams, dt: float, n: int) -> np.ndarray:
    z = ndtri(counter_uniforms(stream_key(seed, STREAM_OU, electrode, kind), np.arange((n + 3) // 4)).ravel()[:n])
    rho = math.exp(-dt / params.relaxation_time) if params.relaxation_time > 0 else 0.0
    sigma = params.stationary_std
    # x_0 from the stationary law, then the exact AR(1) update between knots
    e = sigma * math.sqrt(1 - rho * rho) * z
    e[0] = sigma * z[0]
    return lfilter([1.0], [1.0, -rho], e)


def ou_values(process: DriftProcess, electrode: int, kind: int, times) -> np.ndarray:
    """Slow drift at ``times`` (s): exact OU knots, linearly interpolated."""
    params = _params(process, electrode, kind)
    t = np.asarray(times, dtype=float)
    if params.stationary_std == 0 or t.size == 0:
        return np.zeros(t.shape)
    if np.any(t < 0):
        raise ValueError("drift times must be >= 0")
    dt = process.knot_interval
    needed = int(np.max(t) // dt) + 2
    n = 1 << max(10, (needed - 1).bit_length())
    knots = _ou_knots(process.seed, electrode, kind, params, dt, n)
    return np.interp(t / dt, np.arange(n), knots)


def _params(process: DriftProcess, electrode: int, kind: int) -> OUParams:
    ch = process.channel(electrode)
    return ch.phase if kind == _PHASE else ch.log_amplitude


def jitter_values(process: DriftProcess, electrode: int, shot_indices) -> tuple[np.ndarray, np.ndarray]:
    """Per-shot (phase, log-amplitude) jitter for one channel."""
    ch = process.channel(electrode)
    idx = np.asarray(shot_indices)
    if ch.phase.jitter_std == 0 and ch.log_amplitude.jitter_std == 0:
        return np.zeros(idx.shape), np.zeros(idx.shape)
    z = ndtri(counter_uniforms(stream_key(process.seed, STREAM_JITTER, electrode), idx)[:, :2])
    return ch.phase.jitter_std * z[:, 0], ch.log_amplitude.jitter_std * z[:, 1]


def drifted_amplitudes(drives: DriveSettings, process: DriftProcess | None, times, shot_indices) -> np.ndarray:
    """Complex channel amplitudes, shape (n_shots, n_channels), in the
    electrode order of ``drives``."""
    base = drives.complex_amplitudes()
    times = np.asarray(times, dtype=float)
    idx = np.asarray(shot_indices)
    if process is None or process.is_static(drives.electrodes):
        return np.broadcast_to(base, (times.size, base.size)).copy()
    out = np.empty((times.size, base.size), dtype=complex)
    for k, ch in enumerate(drives.channels):
        dphi = ou_values(process, ch.electrode, _PHASE, times)
        dlog = ou_values(process, ch.electrode, _LOGAMP, times)
        jphi, jlog = jitter_values(process, ch.electrode, idx)
        out[:, k] = base[k] * np.exp(dlog + jlog + 1j * (dphi + jphi))
    return out


def apply_drift(drives: DriveSettings, process: DriftProcess, t: float, shot_index: int) -> DriveSettings:
    """Drive settings as seen by shot ``shot_index`` fired at time ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    amps = drifted_amplitudes(drives, process, [t], [shot_index])[0]
    return DriveSettings(
        tuple(
            DriveChannel(
                ch.electrode,
                float(abs(a)) if ch.on else ch.amplitude,
                float(np.angle(a)) if ch.on else ch.phase,
                ch.on,
            )
            for ch, a in zip(drives.channels, amps)
        )
    )


def shot_uniforms(seed: int, shot_indices) -> np.ndarray:
    """(n, 4) uniforms for preparation, leak choice, readout and spare."""
    return counter_uniforms(stream_key(seed, STREAM_SHOT), shot_indices)
