import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield.atomic import QUBIT, Polarization, ca43, dipole_matrix_element
from nearfield.calibration import (
    DriftRecord,
    NullingResult,
    OptimizerParams,
    ShotClock,
    TraceRow,
    _Objective,
    _Ref,
    crosstalk_task,
    monitor_drift,
    null_crosstalk,
    null_polarization,
    scan_durations,
)
from nearfield.dynamics import SpamModel, ZoneEnv
from nearfield.fields import ComplexField3, DriveChannel, DriveSettings, ElectrodeFieldMap, analytic_null
from nearfield.scenario import load_scenario

Z = np.array([0, 0, 1.0])
EXACT = OptimizerParams(exact=True, phase_tol=1e-7, amplitude_rel_tol=1e-7)


def pi_map(near1=15290.0, near8=10070.0, r1=3.6, r8=2.9):
    f = {
        (1, "B"): ComplexField3.from_array(near1 * Z),
        (1, "A"): ComplexField3.from_array(near1 / r1 * np.exp(0.7j) * Z),
        (8, "A"): ComplexField3.from_array(near8 * Z),
        (8, "B"): ComplexField3.from_array(near8 / r8 * np.exp(-1.1j) * Z),
    }
    return ElectrodeFieldMap(("A", "B"), (1, 8), f, Z, {1: "B", 8: "A"})


def test_params_validation():
    with pytest.raises(ValueError):
        OptimizerParams(max_evaluations=2)
    with pytest.raises(ValueError):
        OptimizerParams(points=4)
    with pytest.raises(ValueError):
        OptimizerParams(min_span=0.2, max_span=0.1)


def test_shot_clock():
    c = ShotClock(0.01, 5)
    assert c.take(10) == (5, pytest.approx(0.05))
    assert c.shot == 15
    c.jump_to(1.0)
    assert c.shot == 100
    with pytest.raises(ValueError):
        c.jump_to(0.5)


@settings(max_examples=100, deadline=None)
@given(span=st.floats(1e-5, 1.0), points=st.integers(8, 64))
def test_scan_durations_one_per_cell(span, points):
    d = scan_durations(span, points)
    assert d.size == points
    assert np.all(np.diff(d) > 0)
    cells = np.floor(d / span * points - 1e-9)
    np.testing.assert_array_equal(cells, np.arange(points))
    assert span * (1 - 0.5 / points) <= d[-1] <= span * (1 + 1e-12)


def test_noiseless_crosstalk_reaches_analytic_null():
    env = ZoneEnv(ca43(), pi_map(), "B", 2.8)
    r = null_crosstalk(env, 1, 8, "A", EXACT, initial=(0.3, 2.0))
    a, ph = analytic_null(env.field_map, 1, 8, "A", Polarization.PI)
    assert not r.diverged
    assert r.R < 1e-5
    assert r.amplitude == pytest.approx(a, abs=1e-4)
    assert abs((r.phase - ph + math.pi) % (2 * math.pi) - math.pi) < 1e-4
    d = abs(dipole_matrix_element(ca43(), QUBIT, 2.8))
    assert r.omega_driven == pytest.approx(d * 15290 * abs(1 - np.exp(-0.4j) / (3.6 * 2.9)), rel=1e-6)
    assert r.iterations == len(r.history) <= EXACT.max_evaluations


def test_unreachable_null_is_flagged_diverged():
    fmap = pi_map()
    fmap = fmap.with_entry(8, "A", ComplexField3(0, 0, 1e-3))
    env = ZoneEnv(ca43(), fmap, "B", 2.8)
    r = null_crosstalk(env, 1, 8, "A", replace(EXACT, max_evaluations=20, max_amplitude=2.0), initial=(0.3, 2.0))
    assert r.diverged


def test_field_model_prediction_is_exact_for_static_fields():
    env = ZoneEnv(ca43(), pi_map(), "B", 2.8)
    task = crosstalk_task(env, 1, 8, "A", SpamModel())
    obj = _Objective(task, _Ref(1.0, 0.0), ShotClock(0.01), EXACT)
    obj.expected = 5000.0
    rng = np.random.default_rng(1)
    for a, ph in zip(rng.uniform(0, 1, 6), rng.uniform(0, 2 * math.pi, 6)):
        obj(a, ph)
    assert obj.predict(0.8, 0.3) == pytest.approx(task.nulled.expected_rabi(task.settings(0.8, 0.3)), rel=1e-6)


def test_noiseless_polarization_null():
    sc = load_scenario("reference.yaml")
    sc = replace(sc, drift=None, spam=SpamModel())
    p = sc.polarization
    r = null_polarization(sc.env(p.zone), (p.fixed_electrode, p.nulling_electrode), EXACT,
                          fixed_amplitude=p.fixed_amplitude, initial=p.initial)
    a, ph = analytic_null(sc.field_map, p.fixed_electrode, p.nulling_electrode, p.zone, Polarization.SIGMA_PLUS,
                          p.fixed_amplitude)
    assert r.R < 1e-5
    assert r.amplitude == pytest.approx(a, abs=1e-4)
    assert r.phase == pytest.approx(ph, abs=1e-4)
    # the sigma- probe is driven 1.6 kHz off its resonance
    assert r.omega_driven == pytest.approx(math.hypot(11.49e3, 1.6e3), rel=0.01)


def test_polarization_rejects_bad_inputs():
    sc = load_scenario("reference.yaml")
    with pytest.raises(ValueError):
        null_polarization(sc.env("A"), (7, 7), EXACT)
    with pytest.raises(KeyError):
        null_polarization(sc.env("A"), (7, 99), EXACT)


def test_zero_drift_monitor_is_flat():
    env = ZoneEnv(ca43(), pi_map(), "B", 2.8)
    r = null_crosstalk(env, 1, 8, "A", EXACT, initial=(0.3, 2.0))
    task = crosstalk_task(env, 1, 8, "A", SpamModel(), initial=(0.3, 2.0))
    rec = monitor_drift(task, r, 300.0, 100.0, EXACT)
    assert rec.t.tolist() == [0.0, 100.0, 200.0, 300.0]
    assert np.all(rec.R < 1e-5)


def test_result_text_round_trip():
    s = DriveSettings((DriveChannel(1, 1.0, 0.0), DriveChannel(8, 0.42, 3.84)))
    r = NullingResult("crosstalk", s, 8, 15.0, 15000.0, 1.0, 20.0, 3, (TraceRow(0, 1.0, 0.5, 10.0),), False, 0.05,
                      {"reference_omega_hz": "15001.0"})
    back = NullingResult.from_text(r.to_text())
    assert back.settings == s
    assert back.R == pytest.approx(1e-3)
    assert back.context == {"reference_omega_hz": "15001.0"}
    assert r.trace_csv().splitlines()[0] == "iter,phase_rad,amplitude,omega_hz"
    with pytest.raises(ValueError):
        NullingResult("x", s, 8, -1.0, 1.0, 0, 0, 0, (), False, 0.1)


def test_drift_record_validation_and_csv():
    rec = DriftRecord([0.0, 100.0], [1e-3, 2e-3], [1e-4, 1e-4])
    assert rec.to_csv().splitlines() == ["t_s,R", "0.0,0.001", "100.0,0.002"]
    with pytest.raises(ValueError):
        DriftRecord([0.0, 0.0], [1e-3, 1e-3], [0, 0])
