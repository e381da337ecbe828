import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinff import (
    ModelSpec,
    adiabatic_phase_rate,
    analytic_eigenvalues,
    eigensystem,
    eigenvector_derivative,
    hamiltonian,
    state_and_derivative,
)
from spinff.errors import ConfigError, DegeneracyError, DomainError, GaugeError
from spinff.tables import lz_upper_derivative

ALL_MODELS = {
    "lz": (ModelSpec.lz(), (-4.0, 4.0)),
    "tfim": (ModelSpec.tfim(j=(0.3, 0.2), bx=(2.0, -0.5)), (0.0, 2.5)),
    "qa": (ModelSpec.qa(), (0.1, 9.9)),
    "gen": (ModelSpec.gen(), (0.1, 24.9)),
}


# ---------------------------------------------------------------------------
# Hamiltonian matrices

def test_lz_matrix_at_origin(lz_model):
    H = hamiltonian(lz_model, 0.0)
    np.testing.assert_allclose(H, 0.5 * np.array([[0, 1], [1, 0]]), atol=1e-15)


def test_tfim_zero_couplings_gives_zero_matrix():
    model = ModelSpec.tfim(j=(0.0, 0.0), bx=(0.0, 0.0))
    assert np.all(hamiltonian(model, 1.23) == 0)


def test_qa_matrix_entries(qa_model):
    H = hamiltonian(qa_model, 0.0)  # Bx = 10
    assert H[0, 0] == pytest.approx(-1.1)
    assert H[3, 3] == pytest.approx(-0.9)
    assert H[0, 1] == H[1, 3] == pytest.approx(-5.0)
    assert H[0, 3] == 0


def test_gen_matrix_entries(gen_model):
    H = hamiltonian(gen_model, 0.0)  # Bz = 25
    assert H[0, 0] == pytest.approx(33.0)
    assert H[3, 3] == pytest.approx(-17.0)
    assert H[0, 1] == pytest.approx(0.5 - 0.5j)
    assert H[1, 0] == pytest.approx(0.5 + 0.5j)


def test_hamiltonian_is_hermitian_everywhere():
    for model, (lo, hi) in ALL_MODELS.values():
        for R in np.linspace(lo, hi, 7):
            H = hamiltonian(model, R)
            np.testing.assert_allclose(H, H.conj().T, atol=0)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        ModelSpec("xy", constants={})


def test_nonfinite_coupling_rejected():
    with pytest.raises(DomainError):
        ModelSpec.lz(delta=float("nan"))
    with pytest.raises(DomainError):
        hamiltonian(ModelSpec.lz(), float("inf"))


# ---------------------------------------------------------------------------
# eigen-systems

def test_lz_eigensystem_at_origin(lz_model):
    states = eigensystem(lz_model, 0.0)
    assert [s.energy for s in states] == pytest.approx([-0.5, 0.5])
    ground = states[0].amplitudes.real
    expect = np.array([1.0, -1.0]) / np.sqrt(2)
    assert min(np.max(np.abs(ground - expect)), np.max(np.abs(ground + expect))) < 1e-12


def test_tfim_ground_state_symmetry(tfim_model):
    for R in (0.0, 1.0, 2.5):
        states = eigensystem(tfim_model, R)
        c = tfim_model.couplings(R)
        assert states[0].energy == pytest.approx(-np.hypot(c["J"], c["Bx"]), abs=1e-12)
        amp = states[0].amplitudes
        assert abs(amp[1] - amp[2]) < 1e-12
        assert abs(amp[0] - amp[3]) < 1e-12
        assert np.max(np.abs(amp.imag)) < 1e-14


def test_qa_initial_entangled_amplitudes(qa_model):
    # truncated four-digit reference values for the Bx = 10 ground state
    amp = eigensystem(qa_model, 0.0)[0].amplitudes.real
    expect = [0.5300, 0.4744, 0.4744, 0.5184]
    assert np.max(np.abs(amp - expect)) < 1e-4


def test_qa_eigenvector_symmetry_c2_c3(qa_model):
    for R in (1.0, 5.0, 9.0):
        for s in eigensystem(qa_model, R):
            assert abs(s.amplitudes[1] - s.amplitudes[2]) < 1e-12 or \
                abs(s.amplitudes[1] + s.amplitudes[2]) < 1e-12


def test_gen_antisymmetric_level_is_minus_J(gen_model):
    # the (ud - du) combination decouples; its energy is -J, not +J
    vals = analytic_eigenvalues(gen_model, 12.5)
    w = [s.energy for s in eigensystem(gen_model, 12.5)]
    assert np.max(np.abs(vals - w)) < 1e-10 * max(np.abs(w))
    assert any(abs(x + 8.0) < 1e-10 for x in w)
    assert not any(abs(x - 8.0) < 1e-6 for x in w)


def test_analytic_matches_numeric_everywhere():
    for name, (model, (lo, hi)) in ALL_MODELS.items():
        for R in np.linspace(lo, hi, 11):
            w = np.array([s.energy for s in eigensystem(model, float(R))])
            vals = analytic_eigenvalues(model, float(R), numeric=w)
            scale = max(1.0, np.max(np.abs(w)))
            assert np.max(np.abs(vals - w)) / scale < 1e-10, name


def test_eigenpair_residuals():
    for model, (lo, hi) in ALL_MODELS.values():
        for R in np.linspace(lo, hi, 5):
            H = hamiltonian(model, float(R))
            scale = max(1.0, np.linalg.norm(H))
            for s in eigensystem(model, float(R)):
                assert abs(np.linalg.norm(s.amplitudes) - 1.0) < 1e-12
                res = np.linalg.norm(H @ s.amplitudes - s.energy * s.amplitudes)
                assert res / scale < 1e-10


@given(st.floats(min_value=0.1, max_value=9.9))
def test_qa_eigenproblem_property(R):
    model = ModelSpec.qa()
    H = hamiltonian(model, R)
    for s in eigensystem(model, R, check=False):
        res = np.linalg.norm(H @ s.amplitudes - s.energy * s.amplitudes)
        assert res < 1e-10 * max(1.0, np.linalg.norm(H))


def test_degenerate_gap_refused():
    model = ModelSpec.tfim(j=(0.0, 0.0), bx=(1.0, 0.0))  # middle levels cross
    with pytest.raises(DegeneracyError):
        eigensystem(model, 0.5, n=1)
    # the gapped ground state is still fine
    eigensystem(model, 0.5, n=0)


# ---------------------------------------------------------------------------
# derivatives and gauge

def test_lz_derivative_matches_closed_form(lz_model):
    # the closed form is written in the gauge where C1 < 0; align signs
    for R in (0.0, 0.7, -2.0):
        C, dC = state_and_derivative(lz_model, R, 1)
        sign = -1.0 if C[0].real > 0 else 1.0
        expect = lz_upper_derivative(lz_model, R)
        assert np.max(np.abs(sign * dC.real - expect)) < 1e-6


def test_lz_derivative_values_at_origin(lz_model):
    # |dC/dR| = 1/(2 sqrt(2)) for both components at the crossing
    dC = eigenvector_derivative(lz_model, 0.0, 1)
    mag = 1.0 / (2.0 * np.sqrt(2.0))
    assert abs(dC[0]) == pytest.approx(mag, abs=1e-8)
    assert abs(dC[1]) == pytest.approx(mag, abs=1e-8)
    assert np.sign(dC[0].real) != np.sign(dC[1].real)


def test_constant_couplings_have_zero_derivative():
    model = ModelSpec("tfim", schedule_map={"J": (0.4, 0.0), "Bx": (1.7, 0.0)})
    dC = eigenvector_derivative(model, 1.0, 0)
    assert np.max(np.abs(dC)) < 1e-12


def test_tfim_normalization_identity(tfim_model):
    C, dC = state_and_derivative(tfim_model, 1.0, 0)
    assert abs(C[1] * dC[1] + C[3] * dC[3]).real < 1e-10


def test_normalization_derivative_identity_all_models():
    for model, (lo, hi) in ALL_MODELS.values():
        R = 0.5 * (lo + hi)
        C, dC = state_and_derivative(model, R, 0)
        assert abs(np.real(np.vdot(C, dC))) < 1e-6


def test_richardson_step_stability(qa_model):
    base = eigenvector_derivative(qa_model, 3.0, 0, h=3e-4)
    half = eigenvector_derivative(qa_model, 3.0, 0, h=1.5e-4)
    assert np.max(np.abs(base - half)) < 1e-6


def test_plain_central_difference_mode(qa_model):
    rich = eigenvector_derivative(qa_model, 3.0, 0)
    plain = eigenvector_derivative(qa_model, 3.0, 0, h=1e-6, richardson=False)
    assert np.max(np.abs(rich - plain)) < 1e-6


def test_gauge_anchor_guard(qa_model):
    # near Bx -> 0 the last ground-state component collapses; a pinned
    # anchor there must be refused
    with pytest.raises(GaugeError):
        eigenvector_derivative(qa_model, 10.0 - 1e-7, 0, anchor=3)


def test_gen_designated_anchor_is_last_component(gen_model):
    states = eigensystem(gen_model, 0.0)
    assert states[0].anchor == 3
    assert states[0].amplitudes[3].imag == pytest.approx(0.0, abs=1e-15)
    assert states[0].amplitudes[3].real > 0


# ---------------------------------------------------------------------------
# adiabatic phase rate

def test_phase_rate_vanishes_for_real_models(tfim_model, qa_model):
    assert adiabatic_phase_rate(tfim_model, 1.0, 0) == pytest.approx(0.0, abs=1e-10)
    assert adiabatic_phase_rate(qa_model, 5.0, 0) == pytest.approx(0.0, abs=1e-10)
    assert adiabatic_phase_rate(ModelSpec.lz(), 0.3, 1) == pytest.approx(0.0, abs=1e-10)


def test_gen_phase_rate_against_plain_difference(gen_model):
    # independent check: plain central difference of the anchored family
    rate = adiabatic_phase_rate(gen_model, 0.0, 0)
    C, dC = state_and_derivative(gen_model, 0.0, 0, h=1e-5, richardson=False)
    oracle = np.real(1j * np.vdot(C, dC))
    assert rate == pytest.approx(oracle, abs=1e-8)
    # constant component phases make it vanish here too
    assert abs(rate) < 1e-10
