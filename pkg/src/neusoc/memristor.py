"""Behavioral model of the CMOS memristor emulator.

A low-threshold NMOS in triode acts as a floating resistor whose gate voltage
``v_g`` is the device state. A transconductor integrates the terminal voltage
onto the state capacitor while the strobe is high; with the strobe low the
capacitor holds its charge.

    I      = beta * (v_g - v_thn) * v_ab
    dv_g/dt = (g_m / c_m) * v_ab          (strobe high)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

# Device resistance levels: LRS = 0.4 MOhm, HRS = 16 MOhm.
R_LRS = 0.4e6
R_HRS = 16e6


@dataclass(frozen=True)
class MemristorParams:
    beta: float = 2.5e-6 / 0.9  # S/V; full rail (1.2 V) lands exactly on LRS
    v_thn: float = 0.3
    g_m: float = 1e-6
    c_m: float = 100e-15
    g_min: float = 1.0 / R_HRS
    g_max: float = 1.0 / R_LRS
    v_dd: float = 1.2

    def __post_init__(self):
        for name in ("beta", "v_thn", "g_m", "c_m", "g_min", "g_max", "v_dd"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.g_min >= self.g_max:
            raise ValueError("g_min must be below g_max")
        if self.v_thn >= self.v_dd:
            raise ValueError("v_thn must be below v_dd")


@dataclass(frozen=True)
class MemristorState:
    v_g: float = 0.0
    strobe: bool = True


@dataclass
class IvTrace:
    """Sampled (t, v_ab, i) triples of a sweep."""

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    v_g: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.i = np.asarray(self.i, dtype=float)
        if not (len(self.t) == len(self.v) == len(self.i)):
            raise ValueError("t, v and i must have equal length")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace time must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_s", "v_ab_V", "i_A"])
            for row in zip(self.t, self.v, self.i):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["t_s", "v_ab_V", "i_A"]:
            raise ValueError(f"{path}: unexpected header {rows[0]}")
        data = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2])


def conductance(state, params: MemristorParams):
    """Triode conductance ``beta*(v_g - v_thn)`` clamped to ``[g_min, g_max]``.

    ``state`` may be a :class:`MemristorState` or a bare gate voltage (scalar or
    array), which is how the synapse layer calls it.
    """
    v_g = state.v_g if isinstance(state, MemristorState) else state
    g = params.beta * (np.asarray(v_g, dtype=float) - params.v_thn)
    g = np.clip(g, params.g_min, params.g_max)
    return float(g) if g.ndim == 0 else g


def current(v_ab, state, params: MemristorParams):
    return conductance(state, params) * v_ab


def integrate_state(state: MemristorState, v_ab: float, dt: float, params: MemristorParams) -> MemristorState:
    """One forward-Euler step of the state equation; a no-op while the strobe is low."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not state.strobe:
        return state
    v_g = state.v_g + (params.g_m / params.c_m) * v_ab * dt
    return replace(state, v_g=min(max(v_g, 0.0), params.v_dd))


@dataclass(frozen=True)
class SineDrive:
    amplitude: float = 0.3
    frequency: float = 1e6
    cycles: float = 2.0
    dt: float = 1e-10


def run_iv_sweep(params: MemristorParams, drive: SineDrive = SineDrive(), v_g0: float | None = None) -> IvTrace:
    """Fixed-step simulation of a sinusoidal ``v_ab`` with the strobe held high.

    The state starts at ``v_g0`` (default: midway between threshold and rail),
    so that the conductance can move in both directions during a cycle.
    """
    if drive.frequency <= 0 or drive.cycles <= 0:
        raise ValueError("frequency and cycles must be positive")
    if drive.dt > 1.0 / (1000.0 * drive.frequency):
        raise ValueError(
            f"dt={drive.dt:g} s too coarse for {drive.frequency:g} Hz; need dt <= {1 / (1000 * drive.frequency):g} s"
        )
    n = int(round(drive.cycles / (drive.frequency * drive.dt)))
    t = np.arange(n + 1) * drive.dt
    v = drive.amplitude * np.sin(2 * np.pi * drive.frequency * t)
    # sin() at multiples of pi is ~1e-16, not 0; snap so the origin is sampled exactly
    v[np.abs(v) < 1e-15 * max(drive.amplitude, 1.0)] = 0.0

    state = MemristorState(v_g=(params.v_thn + params.v_dd) / 2 if v_g0 is None else v_g0)
    i = np.empty_like(v)
    vg = np.empty_like(v)
    for k in range(len(t)):
        vg[k] = state.v_g
        i[k] = current(v[k], state, params)
        state = integrate_state(state, v[k], drive.dt, params)
    return IvTrace(t, v, i, vg)


def shoelace(x, y) -> float:
    """Signed area of the closed polygon through (x, y); counter-clockwise is positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def pinched_metrics(trace: IvTrace, v_eps: float = 1e-6) -> dict:
    """Origin residual and enclosed area of a V-I trace.

    ``origin_residual`` is the largest |I| among samples with |V| < ``v_eps``.
    A pinched loop is a figure-eight whose lobes circulate in opposite senses,
    so a single signed area would cancel; ``loop_area`` is instead the sum of
    |signed area| of each lobe, the trace being cut wherever V changes sign.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    v, i = trace.v, trace.i
    near = np.abs(v) < v_eps
    residual = float(np.max(np.abs(i[near]))) if near.any() else 0.0

    sign = np.sign(v)
    cuts = np.flatnonzero(sign[1:] != sign[:-1]) + 1
    area = 0.0
    for seg in np.split(np.arange(len(v)), cuts):
        if len(seg) > 2:
            area += abs(shoelace(v[seg], i[seg]))
    return {"origin_residual": residual, "loop_area": area}
