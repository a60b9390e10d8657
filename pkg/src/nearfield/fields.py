"""Microwave field network: per-electrode near fields at each trap zone,
drive settings, superposition and polarization decomposition.

Field vectors are stored in effective-coupling units: a component of 1 Hz
drives a transition with unit (normalized) matrix element at a Rabi
frequency of 1 Hz.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .atomic import Polarization, Transition

TWO_PI = 2 * math.pi


def wrap_phase(x: float) -> float:
    """Phase in [0, 2 pi); plain ``%`` can return 2 pi for tiny negatives."""
    r = float(x) % TWO_PI
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class ComplexField3:
    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"field component {name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, v) -> "ComplexField3":
        return cls(*np.asarray(v, dtype=complex))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=complex)

    def __add__(self, other: "ComplexField3") -> "ComplexField3":
        return ComplexField3(self.x + other.x, self.y + other.y, self.z + other.z)

    def scaled(self, k: complex) -> "ComplexField3":
        return ComplexField3(k * self.x, k * self.y, k * self.z)

    def power(self) -> float:
        return float(np.sum(np.abs(self.vector) ** 2))


@dataclass(frozen=True)
class PolarizationComponents:
    pi: complex
    sigma_plus: complex
    sigma_minus: complex

    def component(self, pol: Polarization) -> complex:
        return {
            Polarization.PI: self.pi,
            Polarization.SIGMA_PLUS: self.sigma_plus,
            Polarization.SIGMA_MINUS: self.sigma_minus,
        }[pol]

    def power(self) -> float:
        return abs(self.pi) ** 2 + abs(self.sigma_plus) ** 2 + abs(self.sigma_minus) ** 2


def _unit(axis) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    n = np.linalg.norm(a)
    if a.shape != (3,) or not np.isfinite(n) or n == 0:
        raise ValueError(f"quantization axis must be a nonzero 3-vector, got {axis!r}")
    return a / n


def transverse_frame(axis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-handed (x', y', axis).

    x' is the lab x direction with its axis component removed, or lab y
    when the axis lies within 30 degrees of x (avoids cancellation).
    """
    z = _unit(axis)
    for trial in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        xp = trial - np.dot(trial, z) * z
        n = np.linalg.norm(xp)
        if n >= 0.5:
            xp = xp / n
            break
    yp = np.cross(z, xp)
    return xp, yp, z


def polarization_decompose(f: ComplexField3, axis) -> PolarizationComponents:
    """pi along ``axis``; sigma+- = -+(x' +- i y')/sqrt(2).

    With axis z, the field (1, -i, 0)/sqrt(2) is pure sigma+.
    """
    xp, yp, z = transverse_frame(axis)
    v = f.vector
    ex, ey, ez = v @ xp, v @ yp, v @ z
    r2 = math.sqrt(2)
    return PolarizationComponents(
        pi=complex(ez),
        sigma_plus=complex(-(ex + 1j * ey) / r2),
        sigma_minus=complex((ex - 1j * ey) / r2),
    )


def polarization_compose(p: PolarizationComponents, axis) -> ComplexField3:
    """Inverse of :func:`polarization_decompose`."""
    xp, yp, z = transverse_frame(axis)
    r2 = math.sqrt(2)
    ex = (p.sigma_minus - p.sigma_plus) / r2
    ey = 1j * (p.sigma_plus + p.sigma_minus) / r2
    return ComplexField3.from_array(ex * xp + ey * yp + p.pi * z)


def rabi_frequency(components: PolarizationComponents, transition: Transition, matrix_element: complex) -> float:
    """Rabi frequency (Hz) of ``transition`` under the given field."""
    return abs(matrix_element) * abs(components.component(transition.polarization))


@dataclass(frozen=True)
class ElectrodeFieldMap:
    zones: tuple[str, ...]
    electrodes: tuple[int, ...]
    field: Mapping[tuple[int, str], ComplexField3]
    quantization_axis: np.ndarray
    home_zone: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        object.__setattr__(self, "electrodes", tuple(sorted(self.electrodes)))
        object.__setattr__(self, "quantization_axis", _unit(self.quantization_axis))
        missing = [(e, z) for e in self.electrodes for z in self.zones if (e, z) not in self.field]
        if missing:
            raise ValueError(f"field map missing entries for {missing}")
        for e, z in self.home_zone.items():
            if e not in self.electrodes or z not in self.zones:
                raise ValueError(f"home zone {z!r} of electrode {e} is not in the map")

    def __hash__(self):
        return id(self)

    def entry(self, electrode: int, zone: str) -> ComplexField3:
        try:
            return self.field[(electrode, zone)]
        except KeyError:
            raise KeyError(f"no field for electrode {electrode} in zone {zone!r}") from None

    def components(self, electrode: int, zone: str) -> PolarizationComponents:
        return polarization_decompose(self.entry(electrode, zone), self.quantization_axis)

    def far_zone(self, electrode: int) -> str:
        home = self.home_zone[electrode]
        others = [z for z in self.zones if z != home]
        if len(others) != 1:
            raise ValueError("near/far zones are only defined for two-zone maps")
        return others[0]

    def scaled(self, k: float) -> "ElectrodeFieldMap":
        return replace(self, field={key: f.scaled(k) for key, f in self.field.items()})

    def with_entry(self, electrode: int, zone: str, f: ComplexField3) -> "ElectrodeFieldMap":
        new = dict(self.field)
        new[(electrode, zone)] = f
        return replace(self, field=new)


@dataclass(frozen=True)
class DriveChannel:
    electrode: int
    amplitude: float = 1.0
    phase: float = 0.0
    on: bool = True

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"drive amplitude must be >= 0, got {self.amplitude}")
        object.__setattr__(self, "phase", wrap_phase(self.phase))

    @property
    def complex_amplitude(self) -> complex:
        return self.amplitude * cmath.exp(1j * self.phase) if self.on else 0j


@dataclass(frozen=True)
class DriveSettings:
    channels: tuple[DriveChannel, ...]

    def __post_init__(self):
        chans = tuple(sorted(self.channels, key=lambda c: c.electrode))
        ids = [c.electrode for c in chans]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate drive channels: {ids}")
        object.__setattr__(self, "channels", chans)

    @classmethod
    def from_pairs(cls, pairs: Mapping[int, tuple[float, float]]) -> "DriveSettings":
        """``{electrode: (amplitude, phase)}``."""
        return cls(tuple(DriveChannel(e, a, p) for e, (a, p) in pairs.items()))

    @property
    def electrodes(self) -> tuple[int, ...]:
        return tuple(c.electrode for c in self.channels)

    def channel(self, electrode: int) -> DriveChannel:
        for c in self.channels:
            if c.electrode == electrode:
                return c
        raise KeyError(f"no drive channel for electrode {electrode}")

    def with_channel(self, electrode: int, amplitude: float, phase: float) -> "DriveSettings":
        others = [c for c in self.channels if c.electrode != electrode]
        return DriveSettings(tuple(others) + (DriveChannel(electrode, amplitude, phase),))

    def scaled(self, k: float) -> "DriveSettings":
        return DriveSettings(tuple(replace(c, amplitude=c.amplitude * k) for c in self.channels))

    def complex_amplitudes(self) -> np.ndarray:
        return np.array([c.complex_amplitude for c in self.channels])


def total_field(fmap: ElectrodeFieldMap, drives: DriveSettings, zone: str) -> ComplexField3:
    """Linear superposition of the driven electrodes' fields at ``zone``."""
    if zone not in fmap.zones:
        raise KeyError(f"unknown zone {zone!r}")
    acc = np.zeros(3, dtype=complex)
    for ch in drives.channels:  # ascending electrode id
        if ch.electrode not in fmap.electrodes:
            raise KeyError(f"unknown electrode {ch.electrode}")
        acc = acc + ch.complex_amplitude * fmap.entry(ch.electrode, zone).vector
    return ComplexField3.from_array(acc)


@dataclass(frozen=True)
class RatioEntry:
    electrode: int
    ratio: float
    flagged: bool = False


def ratio_table(fmap: ElectrodeFieldMap, transition: Transition) -> list[RatioEntry]:
    """Omega_near / Omega_far for each electrode driven alone.

    The matrix element is common to both zones and cancels; a vanishing far
    field gives ``inf`` with the entry flagged.
    """
    pol = transition.polarization
    out = []
    for e in fmap.electrodes:
        near = abs(fmap.components(e, fmap.home_zone[e]).component(pol))
        far = abs(fmap.components(e, fmap.far_zone(e)).component(pol))
        if far == 0:
            out.append(RatioEntry(e, math.inf, True))
        else:
            out.append(RatioEntry(e, near / far))
    return out


class NoNullError(ValueError):
    """The nulling electrode has no field along the selected component."""


def analytic_null(
    fmap: ElectrodeFieldMap,
    driven: int,
    nulling: int,
    zone: str,
    selector: Polarization,
    driven_amplitude: complex = 1.0,
) -> tuple[float, float]:
    """Amplitude and phase of the nulling channel that cancels the selected
    polarization component at ``zone`` exactly."""
    d = fmap.components(driven, zone).component(selector) * driven_amplitude
    n = fmap.components(nulling, zone).component(selector)
    if n == 0:
        raise NoNullError(f"electrode {nulling} has no {selector.name} field in zone {zone!r}")
    c = -d / n
    return abs(c), wrap_phase(cmath.phase(c))
