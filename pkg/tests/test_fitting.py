import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield.dynamics import EXACT_SHOTS, RabiScan
from nearfield.fitting import FitResult, estimate_rabi, rabi_model


def synthetic(omega, contrast=0.9, offset=0.03, decay_rate=0.0, span=None, points=40, shots=200, seed=0,
              exact=False):
    span = span if span is not None else 3.0 / omega
    t = np.linspace(0, span, points)
    p = np.clip(rabi_model(t, omega, contrast, offset, decay_rate), 0, 1)
    if exact:
        counts = np.rint((1 - p) * EXACT_SHOTS).astype(np.int64)
        return RabiScan(t, EXACT_SHOTS, counts, {"initial_dark": True})
    rng = np.random.default_rng(seed)
    transferred = rng.binomial(shots, p)
    return RabiScan(t, shots, shots - transferred, {"initial_dark": True})


@settings(max_examples=30, deadline=None)
@given(omega=st.floats(50, 5e4), flops=st.floats(1.0, 6.0), contrast=st.floats(0.3, 0.9),
       offset=st.floats(0.0, 0.1))
def test_noiseless_recovery(omega, flops, contrast, offset):
    scan = synthetic(omega, contrast, offset, span=flops / omega, exact=True)
    fit = estimate_rabi(scan)
    assert fit.converged
    assert fit.omega == pytest.approx(omega, rel=1e-6)
    assert fit.contrast == pytest.approx(contrast, abs=1e-6)
    assert fit.offset == pytest.approx(offset, abs=1e-6)


def test_pull_distribution_is_calibrated():
    pulls = []
    for seed in range(60):
        fit = estimate_rabi(synthetic(2000.0, seed=seed))
        assert fit.converged
        pulls.append((fit.omega - 2000.0) / fit.omega_std)
    pulls = np.array(pulls)
    assert abs(pulls.mean()) < 0.5
    assert 0.6 < pulls.std() < 1.6


def test_decay_is_detected_and_absent_decay_is_not_invented():
    decayed = estimate_rabi(synthetic(1000.0, decay_rate=400.0, shots=400, seed=3))
    assert decayed.decay_time == pytest.approx(1 / 400.0, rel=0.3)
    assert decayed.omega == pytest.approx(1000.0, rel=0.01)
    clean = [estimate_rabi(synthetic(1000.0, seed=s)).decay_time for s in range(20)]
    assert sum(d is not None for d in clean) <= 4
    forced = estimate_rabi(synthetic(1000.0, seed=1), fit_decay=True)
    assert forced.decay_time is not None
    never = estimate_rabi(synthetic(1000.0, decay_rate=400.0, seed=1), fit_decay=False)
    assert never.decay_time is None


def test_fixed_contrast_and_offset_for_partial_flops():
    scan = synthetic(30.0, 0.9, 0.03, span=0.01, points=16, shots=100, exact=True)
    fit = estimate_rabi(scan, contrast=0.9, offset=0.03, fit_decay=False)
    assert fit.omega == pytest.approx(30.0, rel=1e-6)
    assert fit.contrast == 0.9 and fit.offset == 0.03


def test_flat_scan_does_not_converge():
    t = np.linspace(0, 1e-3, 20)
    scan = RabiScan(t, 100, np.full(20, 97), {"initial_dark": True})
    fit = estimate_rabi(scan)
    assert not fit.converged


def test_input_validation():
    with pytest.raises(ValueError):
        estimate_rabi(synthetic(1000.0, points=5))
    with pytest.raises(ValueError):
        estimate_rabi(RabiScan(np.zeros(10), 10, np.zeros(10, int)))
    with pytest.raises(ValueError):
        FitResult(-1.0, 1.0, None, 0.0, 0.0, True)


def test_model_shape():
    assert rabi_model(0.0, 100.0, 0.8, 0.1) == pytest.approx(0.1)
    assert rabi_model(1 / 200, 100.0, 0.8, 0.1) == pytest.approx(0.9)
    assert rabi_model(1e6, 100.0, 0.8, 0.1, 1.0) == pytest.approx(0.5)
    assert math.isclose(float(rabi_model(0.0025, 100.0, 1.0, 0.0)), 0.5, abs_tol=1e-12)
