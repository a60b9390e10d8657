"""Ground-manifold structure of 43Ca+ (J=1/2, I=7/2) in a static field.

Energies come from the closed-form Breit-Rabi expression; magnetic-dipole
matrix elements are evaluated with explicit spin operators in the uncoupled
|m_J, m_I> basis. All frequencies are ordinary frequencies in Hz and fields
are in gauss.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy.optimize import brentq

from .angular import clebsch_gordan

#: field range over which adiabatic labels are guaranteed (checked on load)
LABEL_FIELD_LIMIT_G = 500.0


@dataclass(frozen=True, order=True)
class HyperfineState:
    F: int
    mF: int

    def __post_init__(self):
        if self.F not in (3, 4):
            raise ValueError(f"F must be 3 or 4, got {self.F}")
        if abs(self.mF) > self.F:
            raise ValueError(f"|mF| must be <= F, got F={self.F}, mF={self.mF}")

    def __str__(self):
        return f"({self.F},{self.mF:+d})"


def all_states() -> list[HyperfineState]:
    """The 16 ground-manifold states, sorted by (F, mF)."""
    return [HyperfineState(F, m) for F in (3, 4) for m in range(-F, F + 1)]


class Polarization(enum.Enum):
    """Field polarization, valued by the change in m it drives."""

    PI = 0
    SIGMA_PLUS = 1
    SIGMA_MINUS = -1

    @property
    def q(self) -> int:
        return self.value


@dataclass(frozen=True)
class Transition:
    """Microwave transition from an F=4 level up to an F=3 level."""

    lower: HyperfineState
    upper: HyperfineState
    polarization: Polarization

    def __post_init__(self):
        if self.lower.F != 4 or self.upper.F != 3:
            raise ValueError("transitions run from F=4 (lower) to F=3 (upper)")
        dm = self.upper.mF - self.lower.mF
        if dm != self.polarization.q:
            raise ValueError(
                f"polarization {self.polarization.name} needs delta m = "
                f"{self.polarization.q}, got {dm}"
            )

    @classmethod
    def between(cls, lower, upper) -> "Transition":
        """From two (F, mF) pairs or states; polarization follows from delta m."""
        lo, up = (s if isinstance(s, HyperfineState) else HyperfineState(*s) for s in (lower, upper))
        dm = up.mF - lo.mF
        if abs(dm) > 1:
            raise ValueError(f"|delta m| = {abs(dm)} is not a magnetic-dipole transition")
        return cls(lo, up, Polarization(dm))

    def __str__(self):
        return f"{self.lower}<->{self.upper}"


#: the low-field clock qubit |down> = (4,0), |up> = (3,0)
QUBIT = Transition.between((4, 0), (3, 0))


@dataclass(frozen=True)
class AtomicConstants:
    hyperfine_constant_A: float  # Hz
    g_J: float
    g_I: float
    nuclear_spin_I: float
    bohr_frequency_per_gauss: float  # Hz/G

    def __post_init__(self):
        if not math.isfinite(self.hyperfine_constant_A) or self.hyperfine_constant_A == 0:
            raise ValueError("hyperfine constant A must be finite and nonzero")
        if self.nuclear_spin_I <= 0:
            raise ValueError("nuclear spin must be positive")
        if (2 * self.nuclear_spin_I) % 2 != 1:
            raise ValueError("only half-integer nuclear spins (integer F) are supported")
        if self.bohr_frequency_per_gauss <= 0:
            raise ValueError("muB/h must be positive")

    @property
    def hyperfine_splitting(self) -> float:
        """Signed zero-field splitting A(I+1/2), E(F=I+1/2) - E(F=I-1/2)."""
        return self.hyperfine_constant_A * (self.nuclear_spin_I + 0.5)

    @property
    def dim(self) -> int:
        return int(2 * (2 * self.nuclear_spin_I + 1))


def _parse_constants(data: dict) -> AtomicConstants:
    missing = {"A_hz", "gJ", "gI", "I2", "muB_hz_per_G"} - set(data)
    if missing:
        raise KeyError(f"constants file missing keys: {sorted(missing)}")
    consts = AtomicConstants(
        hyperfine_constant_A=float(data["A_hz"]),
        g_J=float(data["gJ"]),
        g_I=float(data["gI"]),
        nuclear_spin_I=int(data["I2"]) / 2,
        bohr_frequency_per_gauss=float(data["muB_hz_per_G"]),
    )
    check_adiabatic_labels(consts)
    return consts


def load_constants(path: str | Path | None = None) -> AtomicConstants:
    """Read a constants file; the bundled 43Ca+ values when ``path`` is None."""
    if path is None:
        text = resources.files("nearfield").joinpath("data/ca43.yaml").read_text()
    else:
        text = Path(path).read_text()
    return _parse_constants(yaml.safe_load(text))


@lru_cache(maxsize=1)
def ca43() -> AtomicConstants:
    return load_constants()


def check_adiabatic_labels(c: AtomicConstants, b_max: float = LABEL_FIELD_LIMIT_G) -> None:
    """Raise if the closed-form labelling is not continuous up to ``b_max``.

    The stretched-state linear branch meets the square-root branch of its
    neighbours where |x| = 1; below that every (F, mF) label is a smooth
    function of B and F=I+1/2 never crosses F=I-1/2.
    """
    x = _x(c, b_max)
    if abs(x) >= 1:
        raise ValueError(f"Breit-Rabi parameter |x|={abs(x):.3f} >= 1 below {b_max} G")


# -- energies -----------------------------------------------------------------


def _x(c: AtomicConstants, B: float) -> float:
    return (c.g_J - c.g_I) * c.bohr_frequency_per_gauss * B / c.hyperfine_splitting


def _branch(c: AtomicConstants, F: int) -> int:
    return 1 if F == c.nuclear_spin_I + 0.5 else -1


def level_energy(c: AtomicConstants, state: HyperfineState, B: float) -> float:
    """Energy (Hz) of ``state`` relative to the zero-field centre of gravity.

    Negative ``B`` is accepted and means a reversed field.
    """
    I = c.nuclear_spin_I
    dE = c.hyperfine_splitting
    muB = c.bohr_frequency_per_gauss
    m = state.mF
    if abs(m) == I + 0.5:
        s = 1 if m > 0 else -1
        return c.hyperfine_constant_A * I / 2 + s * muB * B * (c.g_J / 2 + c.g_I * I)
    x = _x(c, B)
    root = math.sqrt(1 + 4 * m * x / (2 * I + 1) + x * x)
    return -dE / (2 * (2 * I + 1)) + c.g_I * muB * B * m + _branch(c, state.F) * dE / 2 * root


def level_energy_derivative(c: AtomicConstants, state: HyperfineState, B: float) -> float:
    """Analytic dE/dB in Hz/G."""
    I = c.nuclear_spin_I
    muB = c.bohr_frequency_per_gauss
    m = state.mF
    if abs(m) == I + 0.5:
        return (1 if m > 0 else -1) * muB * (c.g_J / 2 + c.g_I * I)
    dE = c.hyperfine_splitting
    x = _x(c, B)
    dx = (c.g_J - c.g_I) * muB / dE
    root = math.sqrt(1 + 4 * m * x / (2 * I + 1) + x * x)
    return c.g_I * muB * m + _branch(c, state.F) * dE / 2 * (2 * m / (2 * I + 1) + x) * dx / root


@dataclass(frozen=True)
class EigenLevel:
    """A field-dressed level.

    ``mixing_amplitudes`` are the coefficients on |m_J=+1/2, m_I=mF-1/2> and
    |m_J=-1/2, m_I=mF+1/2>, with the sign chosen so the overlap with the
    zero-field coupled state |F, mF> is positive.
    """

    label: HyperfineState
    energy: float
    mixing_amplitudes: tuple[complex, complex]


def _mixing(c: AtomicConstants, state: HyperfineState, B: float) -> tuple[float, float]:
    I = c.nuclear_spin_I
    m = state.mF
    if m == I + 0.5:
        return 1.0, 0.0
    if m == -(I + 0.5):
        return 0.0, 1.0
    A = c.hyperfine_constant_A
    muB_B = c.bohr_frequency_per_gauss * B
    h11 = A / 2 * (m - 0.5) + muB_B * (c.g_J / 2 + c.g_I * (m - 0.5))
    h22 = -A / 2 * (m + 0.5) + muB_B * (-c.g_J / 2 + c.g_I * (m + 0.5))
    h12 = A / 2 * math.sqrt((I + 0.5) ** 2 - m * m)
    E = level_energy(c, state, B)
    v1 = np.array([h12, E - h11])
    v2 = np.array([E - h22, h12])
    v = v1 if np.dot(v1, v1) >= np.dot(v2, v2) else v2
    v = v / math.hypot(*v)
    ref = (
        clebsch_gordan(0.5, 0.5, I, m - 0.5, state.F, m),
        clebsch_gordan(0.5, -0.5, I, m + 0.5, state.F, m),
    )
    if v[0] * ref[0] + v[1] * ref[1] < 0:
        v = -v
    return float(v[0]), float(v[1])


def eigen_level(c: AtomicConstants, state: HyperfineState, B: float) -> EigenLevel:
    a, b = _mixing(c, state, B)
    return EigenLevel(state, level_energy(c, state, B), (complex(a), complex(b)))


def breit_rabi_energies(c: AtomicConstants, B: float) -> list[EigenLevel]:
    """All 16 dressed levels at field ``B`` (gauss), sorted by (F, mF)."""
    if not math.isfinite(B) or B < 0:
        raise ValueError(f"field must be finite and non-negative, got {B}")
    return [eigen_level(c, s, B) for s in all_states()]


# -- transitions ----------------------------------------------------------------


def transition_frequency(c: AtomicConstants, t: Transition, B: float) -> float:
    """Resonance frequency of ``t`` in Hz (positive, ~3.2 GHz)."""
    # differences of small Zeeman shifts keep the full double precision
    shift = (level_energy(c, t.upper, B) - level_energy(c, t.upper, 0.0)) - (
        level_energy(c, t.lower, B) - level_energy(c, t.lower, 0.0)
    )
    return -c.hyperfine_splitting + shift


def fd_step(B: float) -> float:
    return max(1e-3, 1e-4 * abs(B))


def field_sensitivity(c: AtomicConstants, t: Transition, B: float, analytic: bool = False) -> float:
    """df/dB of ``t`` in Hz/G (central difference unless ``analytic``)."""
    if analytic:
        return level_energy_derivative(c, t.upper, B) - level_energy_derivative(c, t.lower, B)
    h = fd_step(B)
    return (transition_frequency(c, t, B + h) - transition_frequency(c, t, B - h)) / (2 * h)


def field_curvature(c: AtomicConstants, t: Transition, B: float) -> float:
    """d2f/dB2 in Hz/G^2, by differencing the analytic slope."""
    h = fd_step(B)
    return (field_sensitivity(c, t, B + h, True) - field_sensitivity(c, t, B - h, True)) / (2 * h)


def find_clock_field(
    c: AtomicConstants, t: Transition, B_range: tuple[float, float], grid_step: float = 1.0
) -> float | None:
    """Field in ``B_range`` where df/dB = 0, or None if there is none.

    The range is scanned on a ``grid_step`` grid for a sign change, which is
    then refined by bracketed root finding on the analytic slope.
    """
    lo, hi = B_range
    if not (0 <= lo < hi):
        raise ValueError(f"bad field range {B_range}")
    n = max(2, int(math.ceil((hi - lo) / grid_step)) + 1)
    grid = np.linspace(lo, hi, n)
    slope = [field_sensitivity(c, t, b, analytic=True) for b in grid]
    for b0, b1, s0, s1 in zip(grid[:-1], grid[1:], slope[:-1], slope[1:]):
        if s0 == 0:
            return float(b0)
        if s0 * s1 < 0:
            return brentq(
                lambda b: field_sensitivity(c, t, b, analytic=True), b0, b1, xtol=1e-12, rtol=1e-14
            )
    if slope[-1] == 0:
        return float(grid[-1])
    return None


# -- magnetic dipole matrix elements ------------------------------------------------


@lru_cache(maxsize=4)
def spin_operators(c: AtomicConstants) -> dict[str, np.ndarray]:
    """J and I operators on the uncoupled basis |m_J> (x) |m_I>.

    Ordering: m_J in (+1/2, -1/2), m_I descending from +I to -I.
    """

    def ladder(j2: int):
        j = j2 / 2
        ms = j - np.arange(j2 + 1)
        jz = np.diag(ms)
        jp = np.zeros((j2 + 1, j2 + 1))
        for k in range(1, j2 + 1):
            m = ms[k]
            jp[k - 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
        return jz, jp

    i2 = int(round(2 * c.nuclear_spin_I))
    jz, jp = ladder(1)
    iz, ip = ladder(i2)
    e_j, e_i = np.eye(2), np.eye(i2 + 1)
    return {
        "Jz": np.kron(jz, e_i),
        "J+": np.kron(jp, e_i),
        "Iz": np.kron(e_j, iz),
        "I+": np.kron(e_j, ip),
    }


def uncoupled_index(c: AtomicConstants, mJ: float, mI: float) -> int:
    i2 = int(round(2 * c.nuclear_spin_I))
    row = 0 if mJ > 0 else 1
    return row * (i2 + 1) + int(round(c.nuclear_spin_I - mI))


def level_vector(c: AtomicConstants, level: EigenLevel) -> np.ndarray:
    """The dressed level as a vector on the uncoupled basis."""
    v = np.zeros(c.dim, dtype=complex)
    m = level.label.mF
    a, b = level.mixing_amplitudes
    I = c.nuclear_spin_I
    if abs(m - 0.5) <= I:
        v[uncoupled_index(c, 0.5, m - 0.5)] = a
    if abs(m + 0.5) <= I:
        v[uncoupled_index(c, -0.5, m + 0.5)] = b
    return v


def moment_operator(c: AtomicConstants, q: int) -> np.ndarray:
    """Spherical component q of g_J J + g_I I (units of mu_B)."""
    ops = spin_operators(c)
    mz = c.g_J * ops["Jz"] + c.g_I * ops["Iz"]
    mp = c.g_J * ops["J+"] + c.g_I * ops["I+"]
    if q == 0:
        return mz.astype(complex)
    if q == 1:
        return -mp.astype(complex) / math.sqrt(2)
    if q == -1:
        return mp.T.astype(complex) / math.sqrt(2)
    raise ValueError(f"q must be -1, 0 or +1, got {q}")


def moment_element(
    c: AtomicConstants, bra: HyperfineState, ket: HyperfineState, q: int, B: float
) -> complex:
    """<bra| mu_q |ket> between dressed levels at field B, unnormalized."""
    vb = level_vector(c, eigen_level(c, bra, B))
    vk = level_vector(c, eigen_level(c, ket, B))
    return complex(vb.conj() @ moment_operator(c, q) @ vk)


def _reference_element(c: AtomicConstants) -> complex:
    return moment_element(c, QUBIT.upper, QUBIT.lower, 0, 0.0)


def dipole_matrix_element(c: AtomicConstants, t: Transition, B: float) -> complex:
    """<upper| mu_q |lower> with q = delta m, normalized to the zero-field
    (4,0)<->(3,0) pi element."""
    return moment_element(c, t.upper, t.lower, t.polarization.q, B) / _reference_element(c)


@lru_cache(maxsize=32)
def dipole_elements(c: AtomicConstants, B: float) -> dict[tuple[HyperfineState, HyperfineState], complex]:
    """Normalized elements for every allowed (lower F=4, upper F=3) pair."""
    table = {}
    for lo in all_states():
        if lo.F != 4:
            continue
        for dm in (-1, 0, 1):
            if abs(lo.mF + dm) <= 3:
                t = Transition(lo, HyperfineState(3, lo.mF + dm), Polarization(dm))
                table[(t.lower, t.upper)] = dipole_matrix_element(c, t, B)
    return table
