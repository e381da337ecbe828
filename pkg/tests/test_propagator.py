import numpy as np
import pytest

from spinff import (
    ModelSpec,
    Schedule,
    eigensystem,
    evolve,
    ff_state,
    ff_state_residual,
    fidelity,
)
from spinff.errors import DomainError, StepSizeError
from spinff.propagator import adiabatic_phase, dynamical_phase


def test_stationary_schedule_keeps_eigenstate(qa_model):
    sched = Schedule(3.0, 0.0, 0.05)
    traj = evolve(qa_model, sched, ("W2", "By", "Bz"), dt=0.05 / 2000)
    assert traj.min_fidelity > 1.0 - 1e-12
    # pure phase evolution exp(-i E t)
    state = eigensystem(qa_model, 3.0)[0]
    expect = state.amplitudes * np.exp(-1j * state.energy * traj.t[-1])
    assert np.max(np.abs(traj.psi[-1] - expect)) < 1e-9


def test_trajectory_layout(tfim_model):
    sched = Schedule(0.0, 20.0, 0.1)
    traj = evolve(tfim_model, sched, ("J3", "W2"), dt=1e-4, samples=300)
    assert len(traj.t) >= 200
    assert traj.t[0] == 0.0
    assert traj.t[-1] == sched.T_FF
    assert np.all(np.diff(traj.t) > 0)
    assert traj.coefficient_names == ("J3", "W2")
    assert traj.coefficients.shape == (len(traj.t), 2)
    # driving coefficients vanish with the velocity at both ends
    assert np.all(traj.coefficients[0] == 0.0)
    assert np.all(traj.coefficients[-1] == 0.0)


def test_norm_conservation_and_endpoint(tfim_model):
    sched = Schedule(0.0, 20.0, 0.1)
    traj = evolve(tfim_model, sched, ("J3", "W2"), dt=1e-4)
    assert traj.max_norm_drift < 1e-10
    assert traj.min_fidelity > 1.0 - 1e-9
    # terminal state is the instantaneous eigenvector up to a global phase
    assert traj.fidelity[-1] > 1.0 - 1e-10


def test_step_halving_changes_little(qa_model, qa_schedule):
    a = evolve(qa_model, qa_schedule, ("W2", "By", "Bz"), dt=1e-4)
    b = evolve(qa_model, qa_schedule, ("W2", "By", "Bz"), dt=5e-5)
    # compare up to the (identical) global phase
    overlap = abs(np.vdot(a.psi[-1], b.psi[-1]))
    assert abs(overlap - 1.0) < 1e-8
    assert np.max(np.abs(a.psi[-1] - b.psi[-1])) < 1e-8


def test_fidelity_trivial_cases(qa_model):
    state = eigensystem(qa_model, 2.0)[0]
    assert fidelity(state.amplitudes, qa_model, 2.0, 0) == pytest.approx(1.0, abs=1e-12)
    other = eigensystem(qa_model, 2.0)[1]
    assert fidelity(other.amplitudes, qa_model, 2.0, 0) == pytest.approx(0.0, abs=1e-12)


def test_dt_must_divide_duration(qa_model, qa_schedule):
    with pytest.raises(DomainError):
        evolve(qa_model, qa_schedule, ("W2", "By", "Bz"), dt=0.1 / 1000.5)


def test_coarse_step_raises_step_size_error(gen_model, gen_schedule):
    with pytest.raises(StepSizeError):
        evolve(gen_model, gen_schedule, "dense", dt=gen_schedule.T_FF / 50)


def test_phase_integrals_zero_at_origin(qa_model, qa_schedule):
    assert dynamical_phase(qa_model, qa_schedule, 0, 0.0) == 0.0
    assert adiabatic_phase(qa_model, qa_schedule, 0, 0.0) == 0.0


def test_adiabatic_phase_accumulation_vanishes():
    cases = [
        (ModelSpec.lz(), Schedule(-5.0, 100.0, 0.1)),
        (ModelSpec.tfim(j=(0.5, 0.0), bx=(3.0, -1.0)), Schedule(0.0, 20.0, 0.1)),
        (ModelSpec.qa(), Schedule(0.0, 100.0, 0.1)),
    ]
    for model, sched in cases:
        assert abs(adiabatic_phase(model, sched, 0, sched.T_FF)) < 1e-8


def test_ff_state_solves_tdse_tfim(tfim_model):
    sched = Schedule(0.0, 20.0, 0.1)
    r1 = ff_state_residual(tfim_model, sched, ("J3", "W2"), 0, 0.025, 1e-4)
    r2 = ff_state_residual(tfim_model, sched, ("J3", "W2"), 0, 0.025, 5e-5)
    assert 3.0 < r1 / r2 < 5.0  # second-order shrinkage
    assert ff_state_residual(tfim_model, sched, ("J3", "W2"), 0, 0.025, 1e-6) < 1e-6


def test_ff_state_residual_lz_reference_point(lz_model):
    sched = Schedule(-2.5, 10.0, 0.5)
    assert ff_state_residual(lz_model, sched, None, 0, 0.25, 1e-6) < 1e-6


def test_ff_state_probe_time_must_be_interior(qa_model, qa_schedule):
    with pytest.raises(DomainError):
        ff_state_residual(qa_model, qa_schedule, ("W2", "By", "Bz"), 0, 0.0, 1e-6)


def test_ff_state_is_unit_norm(gen_model, gen_schedule):
    psi = ff_state(gen_model, gen_schedule, 0, [0.03, 0.05])
    assert np.allclose(np.linalg.norm(psi, axis=1), 1.0, atol=1e-12)
