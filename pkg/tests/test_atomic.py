import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield.atomic import (
    QUBIT,
    AtomicConstants,
    HyperfineState,
    Polarization,
    Transition,
    all_states,
    breit_rabi_energies,
    check_adiabatic_labels,
    ca43,
    dipole_elements,
    dipole_matrix_element,
    field_curvature,
    field_sensitivity,
    find_clock_field,
    level_energy,
    load_constants,
    transition_frequency,
)

import oracles

C = ca43()


def t(lo, up):
    return Transition.between(lo, up)


def test_states_and_transition_validation():
    assert len(all_states()) == 16
    with pytest.raises(ValueError):
        HyperfineState(5, 0)
    with pytest.raises(ValueError):
        HyperfineState(3, 4)
    with pytest.raises(ValueError):
        Transition(HyperfineState(3, 0), HyperfineState(4, 0), Polarization.PI)
    with pytest.raises(ValueError):
        Transition(HyperfineState(4, 0), HyperfineState(3, 1), Polarization.PI)
    with pytest.raises(ValueError):
        t((4, 0), (3, 2))
    assert t((4, 1), (3, 0)).polarization is Polarization.SIGMA_MINUS
    assert t(HyperfineState(4, 0), (3, 1)).polarization is Polarization.SIGMA_PLUS


def test_inverted_structure_and_zero_field_splitting():
    e4 = level_energy(C, HyperfineState(4, 0), 0.0)
    e3 = level_energy(C, HyperfineState(3, 0), 0.0)
    assert e4 < e3
    assert e3 - e4 == pytest.approx(abs(C.hyperfine_splitting), rel=1e-12)
    assert transition_frequency(C, QUBIT, 0.0) == pytest.approx(3.2256082e9, abs=1e3)


def test_anchor_values_at_low_field():
    assert transition_frequency(C, QUBIT, 2.8) == pytest.approx(3.226e9, abs=1e6)
    assert field_sensitivity(C, QUBIT, 2.8) == pytest.approx(6.8e3, rel=0.02)  # Hz/G = 6.8 Hz/mG
    adj = level_energy(C, HyperfineState(4, 1), 2.8) - level_energy(C, HyperfineState(4, 0), 2.8)
    assert abs(adj) == pytest.approx(0.98e6, rel=0.01)
    sp = transition_frequency(C, t((4, 0), (3, 1)), 2.8)
    sm = transition_frequency(C, t((4, 1), (3, 0)), 2.8)
    assert abs(sp - sm) == pytest.approx(1.6e3, abs=100)


def test_clock_fields():
    assert find_clock_field(C, t((4, 0), (3, 1)), (100, 200)) == pytest.approx(146, abs=2)
    assert find_clock_field(C, t((4, 1), (3, 1)), (200, 400)) == pytest.approx(288, abs=2)
    # the low-field qubit has its turning point at zero field
    assert find_clock_field(C, QUBIT, (0, 50)) == 0.0
    assert find_clock_field(C, t((4, 4), (3, 3)), (0, 400)) is None
    b = find_clock_field(C, t((4, 1), (3, 1)), (200, 400))
    assert abs(field_sensitivity(C, t((4, 1), (3, 1)), b)) < 1e-3
    assert field_curvature(C, t((4, 1), (3, 1)), b) != 0


@pytest.mark.parametrize("B", np.linspace(0, 450, 100))
def test_closed_form_matches_diagonalization(B):
    closed = np.sort([lv.energy for lv in breit_rabi_energies(C, float(B))])
    exact = oracles.hyperfine_energies(C, float(B))
    np.testing.assert_allclose(closed, exact, rtol=1e-6)
    assert np.max(np.abs(closed - exact) / np.abs(exact)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(B=st.floats(0.5, 450), lo=st.integers(-4, 4), q=st.sampled_from([-1, 0, 1]))
def test_analytic_slope_matches_difference(B, lo, q):
    if abs(lo + q) > 3:
        return
    tr = t((4, lo), (3, lo + q))
    assert field_sensitivity(C, tr, B, analytic=True) == pytest.approx(field_sensitivity(C, tr, B), rel=1e-5, abs=1e-2)


@pytest.mark.parametrize("B", [0.0, 2.8, 146.09, 287.78, 450.0])
def test_matrix_elements_match_oracle(B):
    ref = oracles.dipole_magnitudes(C, B)
    pk = dipole_elements(C, B)
    assert len(pk) == len(ref) == 21
    for (lo, up), v in ref.items():
        assert abs(pk[(HyperfineState(*lo), HyperfineState(*up))]) == pytest.approx(v, abs=1e-12)


def test_matrix_element_normalization():
    assert dipole_matrix_element(C, QUBIT, 0.0) == pytest.approx(1.0, abs=1e-15)
    # zero-field pi elements follow the Wigner-Eckart pattern sqrt(16 - m^2)/4
    for m in range(-3, 4):
        d = dipole_matrix_element(C, t((4, m), (3, m)), 0.0)
        assert abs(d) == pytest.approx(math.sqrt(16 - m * m) / 4, rel=1e-6)


def test_labels_follow_adiabatic_continuation():
    prev = None
    for B in np.linspace(0, 450, 200):
        levels = {lv.label: lv.energy for lv in breit_rabi_energies(C, float(B))}
        for m in range(-3, 4):
            assert levels[HyperfineState(4, m)] < levels[HyperfineState(3, m)]
        if prev is not None:
            for s in levels:
                assert abs(levels[s] - prev[s]) < 30e6
        prev = levels


def test_constants_file_validation(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("A_hz: -806.402071e6\ngJ: 2.00225664\ngI: 2.046728e-4\nI2: 7\nmuB_hz_per_G: 1.39962449361e6\n")
    assert load_constants(p) == C
    p.write_text("A_hz: -806.4e6\ngJ: 2.0\n")
    with pytest.raises(KeyError):
        load_constants(p)
    with pytest.raises(ValueError):
        AtomicConstants(0.0, 2.0, 0.0, 3.5, 1.4e6)
    with pytest.raises(ValueError):
        AtomicConstants(-806e6, 2.0, 0.0, 3.0, 1.4e6)
    with pytest.raises(ValueError):
        check_adiabatic_labels(C, b_max=5000.0)


def test_negative_field_rejected():
    with pytest.raises(ValueError):
        breit_rabi_energies(C, -1.0)
