import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield.atomic import QUBIT, Polarization, Transition, breit_rabi_energies, ca43, dipole_elements, transition_frequency
from nearfield.budget import (
    ErrorBudget,
    ac_zeeman_shift,
    assemble_budget,
    budget_csv,
    budget_report,
    fidelity_loss,
    off_resonant_error,
    off_resonant_range,
    phase_error,
    spectator_channels,
    spectator_errors,
    spin_flip_error,
)
from nearfield.dynamics import INDEX, build_hamiltonian
from nearfield.errors import PhysicsError
from nearfield.fields import PolarizationComponents
from nearfield.scenario import load_scenario

C = ca43()
ZERO = PolarizationComponents(0, 0, 0)
SP, SM = Polarization.SIGMA_PLUS, Polarization.SIGMA_MINUS


def test_spin_flip_values():
    assert spin_flip_error(7.2e-4)[0] == pytest.approx(1.28e-6, rel=0.01)
    assert spin_flip_error(1.2e-3)[0] == pytest.approx(3.55e-6, rel=0.01)
    assert spin_flip_error(2.77e-3)[0] == pytest.approx(1.89e-5, rel=0.01)
    assert spin_flip_error(3e-3)[0] == pytest.approx(2.2e-5, rel=0.02)
    assert spin_flip_error(1.0) == pytest.approx((1.0, math.pi**2 / 4))
    with pytest.raises(ValueError):
        spin_flip_error(-1e-3)


def test_phase_and_fidelity():
    assert phase_error(340.0, 15.29e3) == pytest.approx(0.070, abs=1e-3)
    assert fidelity_loss(1e-3) == pytest.approx(1e-6)
    with pytest.raises(ValueError):
        phase_error(1.0, 0.0)
    with pytest.raises(ValueError):
        fidelity_loss(-1.0)


def test_combined_suppression():
    assert off_resonant_error(2.77e-3 * 10e3, 0.98e6) <= 2e-9


def test_off_resonant_edges():
    assert off_resonant_error(0.0, 1e3) == 0.0
    assert off_resonant_error(1e3, math.inf) == 0.0
    assert off_resonant_error(1e3, 0.0) == 1.0
    with pytest.raises(PhysicsError):
        off_resonant_error(0.0, 0.0)
    with pytest.raises(PhysicsError):
        ac_zeeman_shift([1e3], [0.0])


@settings(max_examples=200, deadline=None)
@given(R=st.floats(0, 1))
def test_spin_flip_bounded_by_small_angle(R):
    exact, approx = spin_flip_error(R)
    assert 0 <= exact <= approx + 1e-18
    if R < 0.01:
        assert exact == pytest.approx(approx, rel=1e-4, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(om=st.floats(0, 1e6), d=st.floats(-1e7, 1e7).filter(lambda x: abs(x) > 1e-3))
def test_off_resonant_is_probability_and_even(om, d):
    e = off_resonant_error(om, d)
    assert 0 <= e <= 1
    assert e == off_resonant_error(om, -d)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 5e4), b=st.floats(0, 5e4), phase=st.floats(0, 2 * math.pi), d=st.floats(1e4, 1e7))
def test_range_brackets_every_relative_phase(a, b, phase, d):
    p1 = PolarizationComponents(0, a, 0)
    p2 = PolarizationComponents(0, b * complex(math.cos(phase), math.sin(phase)), 0)
    lo, hi = off_resonant_range((p1, p2), d, channels=(SP,))
    actual = off_resonant_error(abs(p1.sigma_plus + p2.sigma_plus), d)
    assert lo <= actual * (1 + 1e-12) + 1e-300
    assert actual <= hi * (1 + 1e-12) + 1e-300


@settings(max_examples=100, deadline=None)
@given(om=st.lists(st.floats(0, 1e5), min_size=1, max_size=5), d=st.floats(1e3, 1e7))
def test_shift_is_odd_in_detuning(om, d):
    dets = [d * (k + 1) for k in range(len(om))]
    assert ac_zeeman_shift(om, dets) == pytest.approx(-ac_zeeman_shift(om, [-x for x in dets]))


def test_spectator_channels_low_field():
    ch = spectator_channels(C, QUBIT, 2.8)
    names = {(c.qubit_level, str(c.transition)) for c in ch}
    assert len(ch) == 4
    assert ("lower", "(4,+0)<->(3,+1)") in names and ("upper", "(4,+1)<->(3,+0)") in names
    for c in ch:
        assert c.transition != QUBIT
        assert c.polarization in (SP, SM)
        assert 0.9e6 < abs(c.detuning) < 3e6


@pytest.mark.parametrize("sp,sm", [(20e3, 0.0), (0.0, 20e3), (15e3, 25e3)])
def test_shift_sign_matches_dressed_diagonalization(sp, sm):
    """Exact qubit-frequency shift under sigma light versus the ledger."""
    B = 2.8
    f0 = transition_frequency(C, QUBIT, B)
    levels = breit_rabi_energies(C, B)
    pol = PolarizationComponents(0, sp, sm)
    H = build_hamiltonian(levels, pol, dipole_elements(C, B), f0, B, constants=C).matrix
    w, v = np.linalg.eigh(H)
    lo = w[np.argmax(np.abs(v[INDEX[QUBIT.lower]]) ** 2)]
    up = w[np.argmax(np.abs(v[INDEX[QUBIT.upper]]) ** 2)]
    exact = up - lo
    ledger = spectator_errors(C, QUBIT, B, (pol, ZERO)).shift_actual
    assert abs(ledger) > 1.0
    assert ledger == pytest.approx(exact, rel=2e-3)


def test_spectator_errors_orders_cases():
    p1 = PolarizationComponents(0, 30e3, 20e3)
    p2 = PolarizationComponents(0, -10e3, 5e3j)
    e = spectator_errors(C, QUBIT, 2.8, (p1, p2))
    assert e.off_resonant[0] <= e.off_resonant_actual <= e.off_resonant[1]
    assert abs(e.shift_actual) <= abs(e.shift_worst) + 1e-9


def test_error_budget_validation():
    with pytest.raises(ValueError):
        ErrorBudget(QUBIT, 2.8, 0.1, 1.5, 0.0, (0, 0), 0, 0, 0, 0, 0)


def test_assemble_budget_cap_and_notes():
    p = PolarizationComponents(0, 40e3, 40e3)
    capped = assemble_budget(C, QUBIT, 2.8, 1e-3, (p, ZERO), 15e3, 3e-3, measured_total_bound=1e-4)
    free = assemble_budget(C, QUBIT, 2.8, 1e-3, (p, ZERO), 15e3, 3e-3)
    assert capped.total_addressing_error == 1e-4
    assert free.total_addressing_error > 1e-4
    assert any("capped" in n for n in capped.notes)
    assert free.total_addressing_error == pytest.approx(
        free.epsilon_spin_flip + free.off_resonant_error[1] + free.fidelity_loss)
    assert free.phase_error_stability == pytest.approx(2 * 3e-3 * free.phase_error)


@pytest.fixture(scope="module")
def reference():
    return load_scenario("reference.yaml")


def test_reference_low_field_budget(reference):
    b = budget_report(reference)
    assert b.epsilon_spin_flip == pytest.approx(3.55e-6, rel=0.01)
    lo, hi = b.off_resonant_error
    assert lo == pytest.approx(6e-4, rel=0.05)
    assert hi == pytest.approx(5e-3, rel=0.05)
    assert b.ac_zeeman_shift == pytest.approx(340, rel=0.05)
    assert b.phase_error == pytest.approx(0.070, abs=1e-3)
    assert b.total_addressing_error < 3e-3 + 1e-15
    assert b.total_addressing_error == reference.budget.measured_total_bound


def test_reference_clock_projections(reference):
    p288 = next(p for p in reference.budget.projections if p.B > 200)
    b = budget_report(reference, qubit=p288.qubit, B=p288.B)
    assert b.off_resonant_error[1] <= 2 * 5e-7
    assert b.ac_zeeman_shift < 4.0
    assert b.total_addressing_error <= 4e-6
    assert b.measured_total_bound is None
    p146 = next(p for p in reference.budget.projections if p.B < 200)
    b = budget_report(reference, qubit=p146.qubit, B=p146.B)
    assert b.total_addressing_error < 1e-4
    assert b.qubit.polarization is SP


def test_budget_csv_layout(reference):
    cols = {"a": budget_report(reference), "b": budget_report(reference, B=10.0)}
    rows = list(csv.reader(io.StringIO(budget_csv(cols))))
    assert rows[0] == ["metric", "a", "b"]
    assert [r[0] for r in rows[1:]] == [k for k, _ in cols["a"].rows()]
    float(rows[1][1])

