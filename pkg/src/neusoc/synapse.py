"""Bistable memristive STDP synapse.

Each synapse carries a presynaptic trace (launched by a pre spike, decaying
with ``tau_p``), a postsynaptic trace (``tau_m``), and the memristor gate
voltage ``v_g``. A post spike samples the pre trace and raises ``v_g``; a pre
spike samples the post trace and lowers it. A weak latch slowly regenerates
``v_g`` away from ``v_w_thr`` toward one of the rails.

``latch`` and ``stdp_delta`` accept arrays; the crossbar in
:mod:`neusoc.network` reuses them on a whole weight matrix at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .memristor import MemristorParams, conductance

# Reported dynamic energy of one spike event, LRS, 600 mV across the synapse.
REPORTED_SPIKE_ENERGY_J = 91.24e-15
REPORTED_SPIKE_VOLTAGE = 0.6


class SpikeKind(enum.Enum):
    PRE = "pre"
    POST = "post"


class LongTermState(enum.Enum):
    LRS = "LRS"
    HRS = "HRS"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class SpikeEvent:
    t: float
    kind: SpikeKind

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"spike time must be finite and non-negative, got {self.t!r}")


@dataclass(frozen=True)
class SynapseParams:
    a_plus: float = 0.5
    a_minus: float = 0.5
    tau_p: float = 2e-6
    tau_m: float = 2e-6
    gamma: float = 0.2
    tau_w: float = 2e-3
    v_w_thr: float = 0.6
    v_dd: float = 1.2
    mem: MemristorParams = field(default_factory=MemristorParams)
    t_p_spike: float = 40e-9
    latch_enabled: bool = True
    spike_overhead_j: float | None = None  # None: back-computed from the reported 91.24 fJ

    def __post_init__(self):
        for name in ("a_plus", "a_minus", "tau_p", "tau_m", "tau_w", "v_dd", "t_p_spike"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be non-negative, got {self.gamma!r}")
        if not 0 < self.v_w_thr < self.v_dd:
            raise ValueError("v_w_thr must lie strictly inside (0, v_dd)")
        if self.tau_w < 100 * max(self.tau_p, self.tau_m):
            raise ValueError("tau_w must be at least 100x the trace time-constants")
        if self.mem.v_dd != self.v_dd:
            raise ValueError("memristor and synapse v_dd disagree")

    @property
    def overhead_j(self) -> float:
        if self.spike_overhead_j is not None:
            return self.spike_overhead_j
        ohmic = self.mem.g_max * REPORTED_SPIKE_VOLTAGE**2 * self.t_p_spike
        return REPORTED_SPIKE_ENERGY_J - ohmic


@dataclass(frozen=True)
class SynapseState:
    v_g: float = 0.6
    trace_pre: float = 0.0
    trace_post: float = 0.0
    t_last: float = 0.0


def latch(v_g, dt, params: SynapseParams):
    """Closed-form solution of dv/dt = (v - v_w_thr)/tau_w over ``dt``, clamped to the rails."""
    if not params.latch_enabled or dt == 0:
        return v_g
    v = params.v_w_thr + (v_g - params.v_w_thr) * math.exp(dt / params.tau_w)
    return np.clip(v, 0.0, params.v_dd)


def evolve(state: SynapseState, t_now: float, params: SynapseParams) -> SynapseState:
    dt = t_now - state.t_last
    if dt < 0:
        raise ValueError(f"time moved backwards: {state.t_last!r} -> {t_now!r}")
    if dt == 0:
        return state
    return SynapseState(
        v_g=latch(state.v_g, dt, params),
        trace_pre=state.trace_pre * math.exp(-dt / params.tau_p),
        trace_post=state.trace_post * math.exp(-dt / params.tau_m),
        t_last=t_now,
    )


def on_pre(state: SynapseState, t: float, params: SynapseParams) -> SynapseState:
    s = evolve(state, t, params)
    v_g = np.clip(s.v_g - params.gamma * s.trace_post, 0.0, params.v_dd)
    return replace(s, v_g=v_g, trace_pre=params.a_plus)


def on_post(state: SynapseState, t: float, params: SynapseParams) -> SynapseState:
    s = evolve(state, t, params)
    v_g = np.clip(s.v_g + params.gamma * s.trace_pre, 0.0, params.v_dd)
    return replace(s, v_g=v_g, trace_post=params.a_minus)


def apply_event(state: SynapseState, event: SpikeEvent, params: SynapseParams) -> SynapseState:
    if event.kind is SpikeKind.PRE:
        return on_pre(state, event.t, params)
    return on_post(state, event.t, params)


def run_events(state: SynapseState, events, params: SynapseParams) -> SynapseState:
    for ev in events:
        state = apply_event(state, ev, params)
    return state


def stdp_delta(dt, params: SynapseParams):
    """Closed-form pair-wise STDP window, ``dt = t_post - t_pre``; ``dt == 0`` counts as causal."""
    dt = np.asarray(dt, dtype=float)
    pot = params.gamma * params.a_plus * np.exp(-np.abs(dt) / params.tau_p)
    dep = -params.gamma * params.a_minus * np.exp(-np.abs(dt) / params.tau_m)
    out = np.where(dt >= 0, pot, dep)
    return float(out) if out.ndim == 0 else out


def synaptic_current(state: SynapseState, v_pre_minus_v_post, params: SynapseParams):
    return conductance(state.v_g, params.mem) * v_pre_minus_v_post


def long_term_state(state: SynapseState, params: SynapseParams, tol: float = 1e-3) -> LongTermState:
    if state.v_g >= params.v_dd - tol:
        return LongTermState.LRS
    if state.v_g <= tol:
        return LongTermState.HRS
    return LongTermState.UNDECIDED


def per_spike_energy_report(state: SynapseState, v_across: float, params: SynapseParams) -> float:
    """Ohmic energy of one spike through the synapse plus the fixed circuit overhead.

    The overhead is not modeled from bias currents; by default it is the
    residual that makes the LRS / 600 mV case total the reported 91.24 fJ.
    """
    g = conductance(state.v_g, params.mem)
    return g * v_across**2 * params.t_p_spike + params.overhead_j
