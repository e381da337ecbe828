import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from spinff import Schedule, advanced_parameter, velocity
from spinff.errors import DomainError


def test_velocity_endpoints_and_peak():
    s = Schedule(0.0, 100.0, 0.1)
    assert velocity(s, 0.0) == 0.0
    assert velocity(s, 0.05) == pytest.approx(200.0, abs=1e-12)
    assert velocity(s, 0.1) == pytest.approx(0.0, abs=1e-12)


def test_velocity_quarter_period():
    s = Schedule(0.0, 250.0, 0.1)
    assert velocity(s, 0.025) == pytest.approx(250.0, abs=1e-10)


def test_advanced_parameter_examples():
    s = Schedule(2.0, 100.0, 0.1)
    assert advanced_parameter(s, 0.0) == 2.0
    assert advanced_parameter(s, 0.1) == pytest.approx(12.0, abs=1e-12)
    # the sine vanishes at half period, leaving v_bar * t
    assert advanced_parameter(s, 0.05) == pytest.approx(7.0, abs=1e-12)


def test_total_excursion_matches_quadrature():
    s = Schedule(-1.0, 37.0, 0.25)
    total, _ = quad(lambda t: velocity(s, t), 0.0, s.T_FF, limit=200)
    assert abs(total - s.v_bar * s.T_FF) < 1e-10


def test_range_error_and_clamp():
    s = Schedule(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        velocity(s, -0.1)
    with pytest.raises(DomainError):
        advanced_parameter(s, 1.1)
    assert velocity(s, 1.1, clamp=True) == pytest.approx(0.0, abs=1e-12)
    assert advanced_parameter(s, 1e9, clamp=True) == pytest.approx(1.0, abs=1e-9)


def test_bad_parameters_rejected():
    with pytest.raises(DomainError):
        Schedule(0.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        Schedule(0.0, 1.0, 0.0)


@given(
    st.floats(min_value=0.01, max_value=1e3),
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_velocity_nonnegative_and_derivative(v_bar, T_FF, frac):
    s = Schedule(0.0, v_bar, T_FF)
    t = frac * T_FF
    assert velocity(s, t) >= 0.0
    # d/dt of the advanced parameter is the velocity
    h = 1e-7 * T_FF
    lo, hi = max(0.0, t - h), min(T_FF, t + h)
    fd = (advanced_parameter(s, hi) - advanced_parameter(s, lo)) / (hi - lo)
    scale = max(1.0, 2.0 * v_bar)
    assert abs(fd - velocity(s, 0.5 * (lo + hi))) / scale < 1e-6


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
def test_advanced_parameter_monotone(a, b):
    s = Schedule(0.0, 5.0, 0.3)
    t1, t2 = sorted((a * s.T_FF, b * s.T_FF))
    assert advanced_parameter(s, t2) >= advanced_parameter(s, t1) - 1e-12
