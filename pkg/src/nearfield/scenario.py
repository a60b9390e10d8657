"""Scenario files: one YAML document describing trap, drives, noise and
procedures, with the atomic constants file included by reference."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import metadata, resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .atomic import (
    AtomicConstants,
    QUBIT,
    HyperfineState,
    Transition,
    _parse_constants,
    check_adiabatic_labels,
    transition_frequency,
)
from .calibration import OptimizerParams
from .drift import ChannelDrift, DriftProcess, OUParams
from .dynamics import RWA_LIMIT_HZ, SpamModel, ZoneEnv
from .errors import ConfigError, PhysicsError
from .fields import ComplexField3, ElectrodeFieldMap

DATA = resources.files("nearfield").joinpath("data")


def _line_index(text: str) -> dict[tuple, int]:
    """1-based line of every mapping key / sequence item, keyed by path."""
    out: dict[tuple, int] = {}

    def walk(node, path):
        out.setdefault(path, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (str(k.value),)
                out[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (str(i),))

    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if root is not None:
        walk(root, ())
    return out


class _Reader:
    """Typed access into the parsed document with line-referenced errors."""

    def __init__(self, data: dict, lines: dict[tuple, int], source: str):
        self.data, self.lines, self.source = data, lines, source

    def where(self, path: tuple) -> str:
        p = tuple(str(x) for x in path)
        while p and p not in self.lines:
            p = p[:-1]
        line = self.lines.get(p)
        name = ".".join(str(x) for x in path) or "<root>"
        return f"{self.source}:{line}: {name}" if line else f"{self.source}: {name}"

    def config_error(self, path, msg) -> ConfigError:
        return ConfigError(f"{self.where(path)}: {msg}")

    def physics_error(self, path, msg) -> PhysicsError:
        return PhysicsError(f"{self.where(path)}: {msg}")

    def raw(self, path: tuple, default=...):
        node: Any = self.data
        for k in path:
            if isinstance(node, dict) and k in node:
                node = node[k]
            elif isinstance(node, list) and isinstance(k, int) and k < len(node):
                node = node[k]
            else:
                if default is ...:
                    raise self.config_error(path, "missing required field")
                return default
        return node

    def number(self, path, default=..., *, integer=False):
        v = self.raw(path, default)
        if v is None and default is None:
            return None
        ok = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok:
            raise self.config_error(path, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
        if not integer and not math.isfinite(v):
            raise self.config_error(path, "must be finite")
        return int(v) if integer else float(v)

    def string(self, path, default=...):
        v = self.raw(path, default)
        if not isinstance(v, str):
            raise self.config_error(path, f"expected a string, got {v!r}")
        return v

    def mapping(self, path, default=...):
        v = self.raw(path, default)
        if v is None and default is None:
            return None
        if not isinstance(v, dict):
            raise self.config_error(path, "expected a mapping")
        return v

    def state(self, path) -> HyperfineState:
        v = self.raw(path)
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) for x in v)):
            raise self.config_error(path, f"expected [F, mF], got {v!r}")
        try:
            return HyperfineState(*v)
        except ValueError as e:
            raise self.config_error(path, str(e)) from None


@dataclass(frozen=True)
class CrosstalkConfig:
    driven_zone: str
    nulled_zone: str
    driven_electrode: int
    nulling_electrode: int
    driven_amplitude: float = 1.0
    initial: tuple[float, float] = (0.5, 0.0)
    drive_frequency: float | None = None  # Hz; None means resonant with the qubit


@dataclass(frozen=True)
class PolarizationConfig:
    zone: str
    fixed_electrode: int
    nulling_electrode: int
    fixed_amplitude: float = 1.0
    initial: tuple[float, float] = (0.5, 0.0)


@dataclass(frozen=True)
class MonitorConfig:
    duration: float = 4000.0  # s
    sample_interval: float = 100.0  # s


@dataclass(frozen=True)
class Projection:
    name: str
    qubit: Transition
    B: float


@dataclass(frozen=True)
class BudgetConfig:
    reference_R: float = 1.2e-3
    measured_total_bound: float | None = None
    stability_fraction: float = 3e-3
    projections: tuple[Projection, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    constants: AtomicConstants
    field_map: ElectrodeFieldMap
    drift: DriftProcess | None
    spam: SpamModel
    qubit: Transition
    B: float
    shot_period: float
    crosstalk: CrosstalkConfig
    polarization: PolarizationConfig | None
    monitor: MonitorConfig
    budget: BudgetConfig
    optimizer: OptimizerParams
    table_ratios: dict = field(default_factory=dict)
    hash: str = ""
    path: str = ""

    def env(self, zone: str) -> ZoneEnv:
        return ZoneEnv(self.constants, self.field_map, zone, self.B, self.drift, self.shot_period, self.qubit.lower)

    def with_seed(self, seed: int) -> "Scenario":
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        drift = replace(self.drift, seed=seed) if self.drift is not None else None
        return replace(self, seed=seed, drift=drift)

    @property
    def drive_frequency(self) -> float:
        if self.crosstalk.drive_frequency is not None:
            return self.crosstalk.drive_frequency
        return transition_frequency(self.constants, self.qubit, self.B)


def canonical_hash(doc: dict) -> str:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def _resolve_constants(ref: str, base: Path) -> tuple[str, str]:
    p = base / ref
    if p.is_file():
        return p.read_text(), str(p)
    bundled = DATA.joinpath(ref)
    if bundled.is_file():
        return bundled.read_text(), f"<bundled>/{ref}"
    raise FileNotFoundError(ref)


def _ou(r: _Reader, path) -> OUParams:
    m = r.mapping(path, {})
    unknown = set(m) - {"relaxation_time_s", "stationary_std", "jitter_std"}
    if unknown:
        raise r.config_error(path + (sorted(unknown)[0],), "unknown field")
    vals = {
        "relaxation_time": r.number(path + ("relaxation_time_s",), 0.0),
        "stationary_std": r.number(path + ("stationary_std",), 0.0),
        "jitter_std": r.number(path + ("jitter_std",), 0.0),
    }
    for k, v in vals.items():
        if v < 0:
            raise r.physics_error(path, f"{k} must be >= 0")
    if vals["stationary_std"] > 0 and vals["relaxation_time"] <= 0:
        raise r.physics_error(path + ("relaxation_time_s",), "must be > 0 when stationary_std > 0")
    return OUParams(**vals)


def _channel_drift(r: _Reader, path) -> ChannelDrift:
    return ChannelDrift(_ou(r, path + ("phase",)), _ou(r, path + ("log_amplitude",)))


def _vector(r: _Reader, path) -> np.ndarray:
    v = r.raw(path)
    if not (isinstance(v, list) and len(v) == 3):
        raise r.config_error(path, "expected three [re, im] pairs")
    out = np.zeros(3, dtype=complex)
    for i, c in enumerate(v):
        if isinstance(c, (int, float)) and not isinstance(c, bool):
            out[i] = c
        elif isinstance(c, list) and len(c) == 2:
            out[i] = complex(r.number(path + (i, 0)), r.number(path + (i, 1)))
        else:
            raise r.config_error(path + (i,), f"expected a number or [re, im], got {c!r}")
    return out


def parse_scenario(text: str, source: str = "<scenario>", base: Path | None = None) -> Scenario:
    try:
        data = yaml.safe_load(text)
        lines = _line_index(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{source}: YAML parse error: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    r = _Reader(data, lines, source)
    base = base or Path(".")

    name = r.string(("name",), "scenario")
    seed = r.number(("seed",), integer=True)
    if not 0 <= seed < 2**64:
        raise r.config_error(("seed",), "must be an unsigned 64-bit integer")

    cref = r.string(("constants",), "ca43.yaml")
    try:
        ctext, _ = _resolve_constants(cref, base)
    except FileNotFoundError:
        raise r.config_error(("constants",), f"constants file {cref!r} not found") from None
    try:
        cdoc = yaml.safe_load(ctext)
        constants = _parse_constants(cdoc)
    except (yaml.YAMLError, KeyError, TypeError) as e:
        raise r.config_error(("constants",), f"bad constants file: {e}") from None
    except ValueError as e:
        raise r.physics_error(("constants",), str(e)) from None

    B = r.number(("B_gauss",))
    if B < 0:
        raise r.physics_error(("B_gauss",), "field magnitude must be >= 0")
    try:
        check_adiabatic_labels(constants, max(B, 1.0))
    except ValueError as e:
        raise r.physics_error(("B_gauss",), str(e)) from None

    qubit = QUBIT
    if r.raw(("qubit",), None) is not None:
        qubit = Transition.between(r.state(("qubit", "lower")), r.state(("qubit", "upper")))
    if qubit.lower.F != 4 or qubit.upper.F != 3:
        raise r.config_error(("qubit",), "qubit must connect an F=4 level to an F=3 level")

    axis = _vector(r, ("quantization_axis",)).real
    if not np.all(np.isfinite(axis)) or np.linalg.norm(axis) == 0:
        raise r.physics_error(("quantization_axis",), "must be a nonzero 3-vector")

    zones = r.raw(("zones",))
    if not (isinstance(zones, list) and zones and all(isinstance(z, str) for z in zones)):
        raise r.config_error(("zones",), "expected a list of zone names")
    if len(set(zones)) != len(zones):
        raise r.config_error(("zones",), "duplicate zone names")
    electrodes = r.mapping(("electrodes",))
    fields, home = {}, {}
    for e, spec in electrodes.items():
        if not isinstance(e, int):
            raise r.config_error(("electrodes", e), "electrode ids must be integers")
        h = r.string(("electrodes", e, "home"))
        if h not in zones:
            raise r.config_error(("electrodes", e, "home"), f"unknown zone {h!r}")
        home[e] = h
        for z in zones:
            fields[(e, z)] = ComplexField3.from_array(_vector(r, ("electrodes", e, "field", z)))
    field_map = ElectrodeFieldMap(tuple(zones), tuple(electrodes), fields, axis, home)

    ratios = {}
    for e, v in (r.mapping(("table_ratios",), None) or {}).items():
        ratios[int(e)] = r.number(("table_ratios", e))

    d = r.raw(("drift",), None)
    if d is None:
        drift = None
    else:
        default = _channel_drift(r, ("drift", "default"))
        overrides = {int(e): _channel_drift(r, ("drift", "overrides", e))
                     for e in (r.mapping(("drift", "overrides"), None) or {})}
        knot = r.number(("drift", "knot_interval_s"), 1.0)
        if knot <= 0:
            raise r.physics_error(("drift", "knot_interval_s"), "must be > 0")
        drift = DriftProcess(default, overrides, seed, knot)

    sp = ("spam",)
    spam_kw = {}
    for k in ("prep_error", "p_dark_given_dark", "p_dark_given_bright", "swap_error"):
        v = r.number(sp + (k,), None)
        if v is not None:
            if not 0 <= v <= 1:
                raise r.physics_error(sp + (k,), "probability must lie in [0, 1]")
            spam_kw[k] = v
    spam = SpamModel(**spam_kw)

    shot_period = r.number(("shot_period_s",), 0.01)
    if shot_period <= 0:
        raise r.physics_error(("shot_period_s",), "must be > 0")

    cp = ("crosstalk",)
    crosstalk = CrosstalkConfig(
        driven_zone=r.string(cp + ("driven_zone",)),
        nulled_zone=r.string(cp + ("nulled_zone",)),
        driven_electrode=r.number(cp + ("driven_electrode",), integer=True),
        nulling_electrode=r.number(cp + ("nulling_electrode",), integer=True),
        driven_amplitude=r.number(cp + ("driven_amplitude",), 1.0),
        initial=(r.number(cp + ("initial", "amplitude"), 0.5), r.number(cp + ("initial", "phase_rad"), 0.0)),
        drive_frequency=r.number(cp + ("drive_frequency_hz",), None),
    )
    for key, z in (("driven_zone", crosstalk.driven_zone), ("nulled_zone", crosstalk.nulled_zone)):
        if z not in zones:
            raise r.config_error(cp + (key,), f"unknown zone {z!r}")
    if crosstalk.driven_zone == crosstalk.nulled_zone:
        raise r.config_error(cp + ("nulled_zone",), "must differ from driven_zone")
    for key in ("driven_electrode", "nulling_electrode"):
        if getattr(crosstalk, key) not in electrodes:
            raise r.config_error(cp + (key,), f"unknown electrode {getattr(crosstalk, key)}")
    f_drive = crosstalk.drive_frequency
    if f_drive is not None:
        split = abs(constants.hyperfine_splitting)
        if not abs(f_drive - split) < RWA_LIMIT_HZ:
            raise r.physics_error(
                cp + ("drive_frequency_hz",),
                f"{f_drive:.6g} Hz is not within {RWA_LIMIT_HZ:.0e} Hz of the {split:.6g} Hz splitting "
                "(rotating-wave approximation out of range)",
            )

    pp = ("polarization",)
    polarization = None
    if r.raw(pp, None) is not None:
        polarization = PolarizationConfig(
            zone=r.string(pp + ("zone",)),
            fixed_electrode=r.number(pp + ("fixed_electrode",), integer=True),
            nulling_electrode=r.number(pp + ("nulling_electrode",), integer=True),
            fixed_amplitude=r.number(pp + ("fixed_amplitude",), 1.0),
            initial=(r.number(pp + ("initial", "amplitude"), 0.5), r.number(pp + ("initial", "phase_rad"), 0.0)),
        )
        if polarization.zone not in zones:
            raise r.config_error(pp + ("zone",), f"unknown zone {polarization.zone!r}")
        for key in ("fixed_electrode", "nulling_electrode"):
            if getattr(polarization, key) not in electrodes:
                raise r.config_error(pp + (key,), f"unknown electrode {getattr(polarization, key)}")

    monitor = MonitorConfig(
        r.number(("monitor", "duration_s"), 4000.0),
        r.number(("monitor", "sample_interval_s"), 100.0),
    )
    if monitor.sample_interval <= 0 or monitor.duration < 0:
        raise r.config_error(("monitor",), "need sample_interval_s > 0 and duration_s >= 0")

    bp = ("budget",)
    projections = []
    for i, _ in enumerate(r.raw(bp + ("projections",), []) or []):
        q = bp + ("projections", i)
        projections.append(Projection(
            r.string(q + ("name",)),
            Transition.between(r.state(q + ("lower",)), r.state(q + ("upper",))),
            r.number(q + ("B_gauss",)),
        ))
    budget = BudgetConfig(
        reference_R=r.number(bp + ("reference_R",), 1.2e-3),
        measured_total_bound=r.number(bp + ("measured_total_bound",), None),
        stability_fraction=r.number(bp + ("stability_fraction",), 3e-3),
        projections=tuple(projections),
    )

    op = r.mapping(("optimizer",), None) or {}
    known = OptimizerParams.__dataclass_fields__
    kw = {}
    for k, v in op.items():
        if k not in known:
            raise r.config_error(("optimizer", k), "unknown optimizer parameter")
        kw[k] = v
    try:
        optimizer = OptimizerParams(**kw)
    except (TypeError, ValueError) as e:
        raise r.config_error(("optimizer",), str(e)) from None

    digest = canonical_hash({"scenario": data, "constants": cdoc})
    return Scenario(name, seed, constants, field_map, drift, spam, qubit, B, shot_period, crosstalk,
                    polarization, monitor, budget, optimizer, ratios, digest, source)


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.is_file():
        bundled = DATA.joinpath(str(path))
        if bundled.is_file():
            return parse_scenario(bundled.read_text(), f"<bundled>/{path}", Path(str(DATA)))
        raise ConfigError(f"{path}: scenario file not found")
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse_scenario(text, str(p), p.parent)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    messages: tuple[str, ...]
    exit_code: int


def validate_scenario(path: str | Path) -> ValidationReport:
    try:
        s = load_scenario(path)
    except PhysicsError as e:
        return ValidationReport(False, (f"physics: {e}",), 3)
    except ConfigError as e:
        return ValidationReport(False, (f"config: {e}",), 2)
    notes = [f"ok: {s.name} ({len(s.field_map.electrodes)} electrodes, zones {', '.join(s.field_map.zones)})"]
    for e, ratio in sorted(s.table_ratios.items()):
        notes.append(f"table ratio for electrode {e}: {ratio}")
    return ValidationReport(True, tuple(notes), 0)


def tool_version() -> str:
    try:
        return metadata.version("nearfield")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunManifest:
    command: str
    scenario_hash: str
    seed: int
    tool_version: str
    outputs: list[str]
    wall_clock_s: float
    argv: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"
