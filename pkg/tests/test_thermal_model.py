import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kantherm.dataset import ScenarioSpec, synth_profile
from kantherm.errors import ConfigError, DomainError, IntegrationError
from kantherm.thermal_model import (
    BatteryParams, DriveInputs, ThermalState, Trajectory, heat_generation, integrate, ocv,
    rk4_step, simulate, state_derivative, stored_energy, terminal_voltage,
)

P = BatteryParams()
temps = st.floats(250.0, 400.0)
currents = st.floats(-10.0, 10.0)


def scenario(current_c_rate=0.0, soc=0.5, temp=298.15, duration=100.0, dt=1.0, cooling=0.0):
    prof = synth_profile("cc", current_c_rate, duration, dt)
    return ScenarioSpec("s", prof, soc, temp, ((0.0, cooling),), duration, dt)


# --- parameters -------------------------------------------------------------------

def test_default_parameter_values():
    assert (P.r1, P.r2, P.c1, P.c2, P.c_inf, P.entropic_coeff) == (1.61, 3.14, 59.5, 4.4, 10.0, 1e-4)
    assert P.rs == 0.01 and P.qb == 8280.0


@pytest.mark.parametrize("field,value", [("r1", 0.0), ("c2", -1.0), ("qb", math.inf), ("rs", 0.0)])
def test_parameters_reject_non_positive(field, value):
    with pytest.raises(ConfigError):
        BatteryParams(**{field: value})


def test_ocv_table_must_be_monotone():
    with pytest.raises(ConfigError):
        BatteryParams(ocv_table=((0, 3.0), (0.5, 2.9), (1, 3.4)))
    with pytest.raises(ConfigError):
        BatteryParams(ocv_table=((0, 3.0), (0, 3.1), (1, 3.4)))


def test_params_file_round_trip(tmp_path):
    p = BatteryParams(rs=0.02, ocv_table=((0.0, 2.9), (1.0, 3.5)))
    p.to_file(tmp_path / "b.ini")
    assert BatteryParams.from_file(tmp_path / "b.ini") == p


def test_params_file_unknown_key(tmp_path):
    (tmp_path / "b.ini").write_text("[battery]\nr1 = 1\nbogus = 2\n")
    with pytest.raises(ConfigError, match="bogus"):
        BatteryParams.from_file(tmp_path / "b.ini")


# --- voltage and heat ----------------------------------------------------------------

@pytest.mark.parametrize("soc,volts", [(0.0, 3.0), (0.1, 3.2), (0.9, 3.35), (1.0, 3.45)])
def test_ocv_at_knots(soc, volts):
    assert ocv(soc, P) == pytest.approx(volts, abs=1e-15)


def test_ocv_midpoint():
    assert ocv(0.5, P) == pytest.approx(3.275, abs=1e-12)


@pytest.mark.parametrize("soc", [-0.01, 1.2])
def test_ocv_out_of_range(soc):
    with pytest.raises(DomainError):
        ocv(soc, P)


@pytest.mark.parametrize("current,expected", [(0.0, 3.275), (2.3, 3.252), (-2.3, 3.298)])
def test_terminal_voltage(current, expected):
    assert terminal_voltage(0.5, current, P) == pytest.approx(expected, abs=1e-12)


def test_terminal_voltage_propagates_domain_error():
    with pytest.raises(DomainError):
        terminal_voltage(1.5, 1.0, P)


@pytest.mark.parametrize("current,expected", [(0.0, 0.0), (2.3, -0.0156745), (6.9, 0.2703765)])
def test_heat_generation_values(current, expected):
    assert heat_generation(current, 298.15, P) == pytest.approx(expected, abs=1e-12)


def test_heat_generation_rejects_bad_input():
    with pytest.raises(DomainError):
        heat_generation(math.nan, 298.0, P)
    with pytest.raises(DomainError):
        heat_generation(1.0, 0.0, P)


@given(currents, temps)
def test_heat_generation_parity(current, t1):
    # ohmic part is even in I, entropic part odd
    diff = heat_generation(-current, t1, P) - heat_generation(current, t1, P)
    assert diff == pytest.approx(2 * current * t1 * P.entropic_coeff, rel=1e-9, abs=1e-12)


# --- derivative -----------------------------------------------------------------------

@given(temps)
def test_equilibrium_is_fixed_point(t):
    d = state_derivative(ThermalState(t, t, t, 0.5), DriveInputs(0.0, 0.0), P)
    assert d.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_derivative_hand_values():
    d = state_derivative(ThermalState(300.0, 298.0, 298.0, 0.5), DriveInputs(0.0, 0.0), P)
    assert d.t1 == pytest.approx(-2 / (1.61 * 59.5), rel=1e-12)
    assert d.t1 == pytest.approx(-0.020878, abs=1e-6)
    assert d.t2 == pytest.approx(0.282327, abs=1e-6)
    assert d.t_inf == 0.0


def test_soc_rate():
    d = state_derivative(ThermalState(298.0, 298.0, 298.0, 0.5), DriveInputs(2.3, 0.0), P)
    assert d.soc == pytest.approx(-2.7778e-4, rel=1e-4)
    assert d.soc == -2.3 / 8280.0


@given(temps, temps, temps, currents, st.floats(-5, 5))
def test_capacity_weighted_rate_is_net_heat(t1, t2, t3, current, qc):
    # summing the three node equations cancels every exchange term
    d = state_derivative(ThermalState(t1, t2, t3, 0.5), DriveInputs(current, qc), P)
    lhs = P.c1 * d.t1 + P.c2 * d.t2 + P.c_inf * d.t_inf
    rhs = heat_generation(current, t1, P) - qc
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(t1) + abs(t2) + abs(t3)))


def test_derivative_rejects_non_finite():
    with pytest.raises(DomainError):
        state_derivative(ThermalState(math.nan, 1, 1, 0.5), DriveInputs(0.0), P)


# --- RK4 --------------------------------------------------------------------------------

def _rk4_scalar(x, h):
    k1 = -x
    k2 = -(x + 0.5 * h * k1)
    k3 = -(x + 0.5 * h * k2)
    k4 = -(x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def test_rk4_scalar_oracle():
    assert _rk4_scalar(1.0, 0.1) == pytest.approx(0.90483750, abs=1e-8)
    assert abs(_rk4_scalar(1.0, 0.1) - math.exp(-0.1)) < 1e-7


def test_rk4_step_matches_scalar_decay():
    # huge surface/coolant capacities freeze T2, so T1 - T2 obeys x' = -x
    p = BatteryParams(c2=1e12, c_inf=1e12, r1=1.0, c1=1.0)
    s = ThermalState(301.0, 300.0, 300.0, 0.5)
    out = rk4_step(s, DriveInputs(0.0), p, 0.1)
    assert out.t1 - 300.0 == pytest.approx(_rk4_scalar(1.0, 0.1), abs=1e-9)


def test_rk4_order():
    p = BatteryParams(c2=1e12, c_inf=1e12, r1=1.0, c1=1.0)
    s = ThermalState(301.0, 300.0, 300.0, 0.5)
    errs = []
    for h in (0.2, 0.1):
        out = rk4_step(s, DriveInputs(0.0), p, h)
        errs.append(abs(out.t1 - 300.0 - math.exp(-h)))
    assert errs[0] / errs[1] == pytest.approx(32, rel=0.1)  # local error O(h^5)


def test_rk4_equilibrium_unchanged():
    s = ThermalState(298.15, 298.15, 298.15, 0.3)
    assert rk4_step(s, DriveInputs(0.0, 0.0), P, 1.0) == s


def test_rk4_half_steps_agree():
    s = ThermalState(305.0, 300.0, 298.0, 0.8)
    u = DriveInputs(4.6, 0.1)
    full = rk4_step(s, u, P, 1.0)
    half = rk4_step(rk4_step(s, u, P, 0.5), u, P, 0.5)
    assert np.allclose(full.as_tuple(), half.as_tuple(), atol=1e-4)


def test_rk4_rejects_bad_step():
    with pytest.raises(DomainError):
        rk4_step(ThermalState(300, 300, 300, 0.5), DriveInputs(0.0), P, 0.0)


def test_rk4_non_finite_raises_with_time():
    p = BatteryParams(c1=1e-10, r1=1e-10)
    with pytest.raises(IntegrationError) as info:
        rk4_step(ThermalState(1e300, 300, 300, 0.5), DriveInputs(0.0), p, 1.0, t=7.0)
    assert info.value.time == 8.0


# --- simulation -----------------------------------------------------------------------

def test_constant_trajectory_at_equilibrium():
    tr = simulate(scenario(0.0, temp=300.0), P)
    assert len(tr) == 101
    assert np.all(tr.t1 == 300.0) and np.all(tr.t2 == 300.0) and np.all(tr.t_inf == 300.0)


def test_energy_conserved_without_inputs():
    prof = synth_profile("cc", 0.0, 10000.0, 1.0)
    sc = ScenarioSpec("e", prof, 0.5, 298.15, ((0.0, 0.0),), 10000.0, 1.0)
    tr = simulate(sc, P)
    states = integrate(ThermalState(310.0, 300.0, 290.0, 0.5), np.zeros(10000), np.zeros(10000), P)
    e = P.c1 * states[:, 0] + P.c2 * states[:, 1] + P.c_inf * states[:, 2]
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-6
    assert np.allclose(stored_energy(tr, P), stored_energy(tr, P)[0])


def test_cc_1c_discharge_empties_in_one_hour():
    prof = synth_profile("cc", 1.0, 3600.0, 1.0)
    tr = simulate(ScenarioSpec("d", prof, 1.0, 298.15, ((0.0, 0.0),), 3600.0, 1.0), P)
    assert tr.t[-1] == 3600.0
    assert abs(tr.soc[-1]) < 1e-9


def test_soc_exhaustion_truncates_and_flags():
    prof = synth_profile("cc", 2.0, 3600.0, 1.0)
    tr = simulate(ScenarioSpec("d", prof, 0.5, 298.15, ((0.0, 0.0),), 3600.0, 1.0), P)
    assert tr.truncated
    assert tr.clamp_events
    assert tr.soc[-1] == 0.0
    assert tr.t[-1] < 3600.0


def test_steady_state_ordering_under_heating():
    # sustained ohmic heating with no cooling: heat flows core -> surface -> coolant
    prof = synth_profile("cc", 3.0, 600.0, 1.0)
    tr = simulate(ScenarioSpec("h", prof, 1.0, 298.15, ((0.0, 0.0),), 600.0, 1.0), P)
    assert np.all(tr.qdot[1:] > 0)
    assert tr.t1[-1] > tr.t2[-1] > tr.t_inf[-1]


def test_simulate_rejects_bad_duration():
    class Bad:
        duration, dt, initial_soc, initial_temp = 0.0, 1.0, 0.5, 300.0
    with pytest.raises(DomainError):
        simulate(Bad(), P)


def test_simulate_out_of_range_temperature():
    p = BatteryParams(c_inf=1e-3)
    sc = scenario(0.0, cooling=100.0, duration=50.0)
    with pytest.raises(IntegrationError):
        simulate(sc, p)


def test_trajectory_csv_round_trip(tmp_path):
    tr = simulate(scenario(1.0, duration=30.0), P)
    tr.to_csv(tmp_path / "t.csv")
    back = Trajectory.from_csv(tmp_path / "t.csv")
    for a, b in zip(tr.columns(), back.columns()):
        assert np.array_equal(a, b)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "t,I,Qc,T1,T2,Tinf,soc,Vt,Qdot"


def test_integrate_matches_simulate():
    sc = scenario(2.0, soc=1.0, duration=50.0, cooling=0.1)
    tr = simulate(sc, P)
    states = integrate(ThermalState(298.15, 298.15, 298.15, 1.0), tr.current[:-1], tr.cooling[:-1], P)
    assert np.array_equal(states[:, 0], tr.t1)
    assert np.array_equal(states[:, 3], tr.soc)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 0.8), st.floats(280, 320))
def test_trajectory_records_exact_terminal_voltage(rate, soc, temp):
    tr = simulate(scenario(rate, soc=soc, temp=temp, duration=20.0), P)
    for i in (0, len(tr) - 1):
        assert tr.vt[i] == pytest.approx(terminal_voltage(tr.soc[i], tr.current[i], P), abs=1e-12)
        assert tr.qdot[i] == pytest.approx(heat_generation(tr.current[i], tr.t1[i], P), abs=1e-12)
