"""Lumped electro-thermal model of a cylindrical cell with surface cooling.

Three thermal nodes (core ``t1``, surface ``t2``, coolant ``t_inf``) plus
state of charge, integrated with fixed-step RK4 under zero-order hold on the
drive inputs.  Current is positive on discharge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, IntegrationError, ParseError
from .textio import format_pairs, parse_pairs, read_csv, read_ini, write_csv, write_ini

TEMP_MIN, TEMP_MAX = 200.0, 450.0
TRAJECTORY_HEADER = ("t", "I", "Qc", "T1", "T2", "Tinf", "soc", "Vt", "Qdot")

DEFAULT_OCV = ((0.0, 3.00), (0.1, 3.20), (0.9, 3.35), (1.0, 3.45))


@dataclass(frozen=True)
class BatteryParams:
    r1: float = 1.61               # K/W, core <-> surface
    r2: float = 3.14               # K/W, surface <-> coolant
    c1: float = 59.50              # J/K, core
    c2: float = 4.40               # J/K, surface
    c_inf: float = 10.00           # J/K, coolant
    entropic_coeff: float = 1e-4   # W/K
    rs: float = 0.01               # ohm
    qb: float = 2.3 * 3600.0       # A*s
    ocv_table: tuple = DEFAULT_OCV

    def __post_init__(self):
        for name in ("r1", "r2", "c1", "c2", "c_inf", "rs", "qb"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {v}")
        if not math.isfinite(self.entropic_coeff):
            raise ConfigError("entropic_coeff must be finite")
        table = tuple((float(s), float(v)) for s, v in self.ocv_table)
        if len(table) < 2:
            raise ConfigError("ocv_table needs at least two knots")
        socs = [s for s, _ in table]
        volts = [v for _, v in table]
        if socs[0] < 0 or socs[-1] > 1 or any(b <= a for a, b in zip(socs, socs[1:])):
            raise ConfigError("ocv_table SOC values must be strictly increasing in [0, 1]")
        if any(b < a for a, b in zip(volts, volts[1:])):
            raise ConfigError("ocv_table voltages must be non-decreasing")
        object.__setattr__(self, "ocv_table", table)

    @property
    def n_constants(self) -> int:
        """Physical constants the model needs: eight scalars plus the OCV curve."""
        return 9

    @classmethod
    def from_file(cls, path) -> "BatteryParams":
        cp = read_ini(path)
        if not cp.has_section("battery"):
            raise ConfigError(f"{path}: missing [battery] section")
        sec = cp["battery"]
        kwargs = {}
        known = {f for f in cls.__dataclass_fields__}
        for key, value in sec.items():
            if key not in known:
                raise ConfigError(f"{path}: unknown battery parameter {key!r}")
            if key == "ocv_table":
                kwargs[key] = tuple(parse_pairs(value))
            else:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise ConfigError(f"{path}: {key} = {value!r} is not a number") from None
        return cls(**kwargs)

    def to_file(self, path) -> None:
        body = {
            "r1": self.r1, "r2": self.r2, "c1": self.c1, "c2": self.c2,
            "c_inf": self.c_inf, "entropic_coeff": self.entropic_coeff,
            "rs": self.rs, "qb": self.qb, "ocv_table": format_pairs(self.ocv_table),
        }
        write_ini(path, {"battery": body}, header=(
            "Battery parameters.  Units: r1, r2 [K/W]; c1, c2, c_inf [J/K];\n"
            "entropic_coeff [W/K]; rs [ohm]; qb [A*s]; ocv_table soc:volts pairs."))


@dataclass(frozen=True)
class ThermalState:
    t1: float
    t2: float
    t_inf: float
    soc: float

    def as_tuple(self):
        return (self.t1, self.t2, self.t_inf, self.soc)


@dataclass(frozen=True)
class DriveInputs:
    current: float
    cooling_power: float = 0.0


def ocv(soc: float, params: BatteryParams) -> float:
    """Open-circuit voltage by linear interpolation of the OCV table."""
    if not (0.0 <= soc <= 1.0):
        raise DomainError(f"soc={soc} outside [0, 1]")
    socs, volts = zip(*params.ocv_table)
    if soc < socs[0] or soc > socs[-1]:
        raise DomainError(f"soc={soc} outside table range [{socs[0]}, {socs[-1]}]")
    return float(np.interp(soc, socs, volts))


def terminal_voltage(soc: float, current: float, params: BatteryParams) -> float:
    return ocv(soc, params) - current * params.rs


def heat_generation(current: float, t1: float, params: BatteryParams) -> float:
    """Ohmic minus reversible (entropic) heat, I^2 Rs - I T1 E."""
    if not (math.isfinite(current) and math.isfinite(t1)):
        raise DomainError("heat_generation needs finite current and temperature")
    if t1 <= 0:
        raise DomainError(f"t1={t1} K must be positive")
    return current * current * params.rs - current * t1 * params.entropic_coeff


def _deriv(t1, t2, tinf, current, qc, p):
    # float-only hot path shared by state_derivative and the integrator
    q = current * current * p.rs - current * t1 * p.entropic_coeff
    d1 = -(t1 - t2) / (p.r1 * p.c1) + q / p.c1
    d2 = -(t2 - t1) / (p.r1 * p.c2) - (t2 - tinf) / (p.r2 * p.c2)
    d3 = -(tinf - t2) / (p.r2 * p.c_inf) - qc / p.c_inf
    return d1, d2, d3, -current / p.qb


def state_derivative(state: ThermalState, inputs: DriveInputs, params: BatteryParams) -> ThermalState:
    """Time derivative of every state component, returned in a ThermalState."""
    vals = (*state.as_tuple(), inputs.current, inputs.cooling_power)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("non-finite state or inputs")
    if state.t1 <= 0:
        raise DomainError(f"t1={state.t1} K must be positive")
    return ThermalState(*_deriv(state.t1, state.t2, state.t_inf,
                                inputs.current, inputs.cooling_power, params))


def _rk4(y, current, qc, p, h):
    t1, t2, t3, s = y
    k1 = _deriv(t1, t2, t3, current, qc, p)
    a = 0.5 * h
    k2 = _deriv(t1 + a * k1[0], t2 + a * k1[1], t3 + a * k1[2], current, qc, p)
    k3 = _deriv(t1 + a * k2[0], t2 + a * k2[1], t3 + a * k2[2], current, qc, p)
    k4 = _deriv(t1 + h * k3[0], t2 + h * k3[1], t3 + h * k3[2], current, qc, p)
    w = h / 6.0
    return (
        t1 + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        t2 + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        t3 + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        s + w * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
    )


def rk4_step(state: ThermalState, inputs: DriveInputs, params: BatteryParams, h: float,
             t: float = 0.0) -> ThermalState:
    """Advance one classical RK4 step of length ``h`` with inputs held constant."""
    if not h > 0:
        raise DomainError(f"step h={h} must be > 0")
    y = _rk4(state.as_tuple(), inputs.current, inputs.cooling_power, params, h)
    if not all(math.isfinite(v) for v in y):
        raise IntegrationError("non-finite state after RK4 step", time=t + h)
    return ThermalState(*y)


@dataclass
class Trajectory:
    """Sampled simulation output; one entry per ``dt`` including t = 0."""

    name: str
    t: np.ndarray
    current: np.ndarray
    cooling: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    t_inf: np.ndarray
    soc: np.ndarray
    vt: np.ndarray
    qdot: np.ndarray
    truncated: bool = False
    clamp_events: list = field(default_factory=list)
    kind: str = ""
    role: str = ""

    def __len__(self):
        return len(self.t)

    def copy(self, **changes) -> "Trajectory":
        base = {k: (v.copy() if isinstance(v, np.ndarray) else v)
                for k, v in self.__dict__.items()}
        base["clamp_events"] = list(self.clamp_events)
        base.update(changes)
        return Trajectory(**base)

    def columns(self):
        return (self.t, self.current, self.cooling, self.t1, self.t2,
                self.t_inf, self.soc, self.vt, self.qdot)

    def to_csv(self, path) -> None:
        write_csv(path, TRAJECTORY_HEADER, zip(*(c.tolist() for c in self.columns())))

    @classmethod
    def from_csv(cls, path, name=None) -> "Trajectory":
        header, rows = read_csv(path)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ParseError(f"{path}: header {header} != {list(TRAJECTORY_HEADER)}")
        data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(-1, 9)
        return cls(name or Path(path).stem, *data.T)


def simulate(scenario, params: BatteryParams) -> Trajectory:
    """Integrate a scenario from its initial conditions.

    ``scenario`` needs ``duration``, ``dt``, ``initial_soc``, ``initial_temp``
    and ``current_at(t)`` / ``cooling_at(t)`` callables.  If SOC leaves [0, 1]
    it is clamped, the event recorded, and the trajectory stops there.
    """
    if not scenario.duration > 0 or not scenario.dt > 0:
        raise DomainError("scenario duration and dt must be > 0")
    h = float(scenario.dt)
    n_steps = int(round(scenario.duration / h))
    t0 = float(scenario.initial_temp)
    y = (t0, t0, t0, float(scenario.initial_soc))
    times, cur, qcs, states = [], [], [], []
    events = []

    def record(i, y):
        t = i * h
        if not all(math.isfinite(v) for v in y) or not all(TEMP_MIN <= v <= TEMP_MAX for v in y[:3]):
            raise IntegrationError(f"state {y} outside valid range", time=t)
        times.append(t)
        cur.append(float(scenario.current_at(t)))
        qcs.append(float(scenario.cooling_at(t)))
        states.append(y)

    record(0, y)
    last = n_steps
    for i in range(n_steps):
        y = _rk4(y, cur[-1], qcs[-1], params, h)
        if not all(math.isfinite(v) for v in y):
            raise IntegrationError("non-finite state", time=(i + 1) * h)
        if y[3] < 0.0 or y[3] > 1.0:
            events.append(((i + 1) * h, y[3]))
            y = (*y[:3], min(1.0, max(0.0, y[3])))
        record(i + 1, y)
        if events:
            last = i + 1
            break
    truncated = last < n_steps
    states = np.array(states)
    cur = np.array(cur)
    qcs = np.array(qcs)
    soc = states[:, 3]
    socs, volts = zip(*params.ocv_table)
    vt = np.interp(soc, socs, volts) - cur * params.rs
    qdot = cur * cur * params.rs - cur * states[:, 0] * params.entropic_coeff
    return Trajectory(
        name=getattr(scenario, "name", "scenario"), t=np.array(times), current=cur,
        cooling=qcs, t1=states[:, 0], t2=states[:, 1], t_inf=states[:, 2], soc=soc,
        vt=vt, qdot=qdot, truncated=truncated, clamp_events=events,
        kind=getattr(scenario, "kind", ""), role=getattr(scenario, "role", ""),
    )


def integrate(state: ThermalState, currents, coolings, params: BatteryParams, h: float = 1.0):
    """RK4 from ``state`` with inputs held over each step; returns (n + 1, 4) states.

    No range checks or SOC clamping: this is the bare re-simulation loop.
    """
    y = state.as_tuple()
    out = [y]
    for current, qc in zip(currents, coolings):
        y = _rk4(y, float(current), float(qc), params, h)
        out.append(y)
    return np.array(out)


def stored_energy(traj_or_state, params: BatteryParams):
    """Capacity-weighted temperature sum C1 T1 + C2 T2 + Cinf Tinf [J]."""
    s = traj_or_state
    return params.c1 * s.t1 + params.c2 * s.t2 + params.c_inf * s.t_inf


__all__ = [
    "BatteryParams", "ThermalState", "DriveInputs", "Trajectory", "ocv",
    "terminal_voltage", "heat_generation", "state_derivative", "rk4_step",
    "simulate", "integrate", "stored_energy",
]
