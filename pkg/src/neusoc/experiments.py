"""Experiment drivers behind the CLI subcommands.

Each returns plain result objects; writing files and choosing exit codes is
left to :mod:`neusoc.cli`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, subset_digits
from .memristor import IvTrace, MemristorParams, SineDrive, pinched_metrics, run_iv_sweep
from .network import Evaluation, History, Mode, Network, NetworkConfig, evaluate
from .synapse import (
    LongTermState,
    SpikeEvent,
    SpikeKind,
    SynapseParams,
    SynapseState,
    apply_event,
    conductance,
    evolve,
    long_term_state,
    stdp_delta,
)

TRANSIENT_HEADER = ["t_s", "v_g_V", "i_syn_A"]
STDP_HEADER = ["dt_s", "delta_vg_V"]


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) for x in r])


# ---------------------------------------------------------------------------
# hysteresis


@dataclass
class HysteresisResult:
    trace: IvTrace
    origin_residual: float
    loop_area: float
    dt_halving_change: float
    tol: float

    @property
    def degenerate(self) -> bool:
        return self.loop_area == 0.0

    @property
    def passed(self) -> bool:
        return self.origin_residual < self.tol and self.loop_area > 0


def dt_halving_change(mem: MemristorParams, drive: SineDrive) -> float:
    """Relative change of the final state when the step is halved."""
    a = run_iv_sweep(mem, drive).v_g[-1]
    b = run_iv_sweep(mem, replace(drive, dt=drive.dt / 2)).v_g[-1]
    return abs(b - a) / abs(a) if a != 0 else abs(b - a)


def hysteresis(mem: MemristorParams, drive: SineDrive, tol: float = 1e-12) -> HysteresisResult:
    trace = run_iv_sweep(mem, drive)
    m = pinched_metrics(trace)
    return HysteresisResult(trace, m["origin_residual"], m["loop_area"], dt_halving_change(mem, drive), tol)


# ---------------------------------------------------------------------------
# spike-pair transients


def pairing(t0: float, dt: float) -> list[SpikeEvent]:
    """One pre/post pair with ``dt = t_post - t_pre``; the earlier spike sits at ``t0``.

    At ``dt == 0`` the pre spike is listed first, so it counts as causal.
    """
    if dt >= 0:
        return [SpikeEvent(t0, SpikeKind.PRE), SpikeEvent(t0 + dt, SpikeKind.POST)]
    return [SpikeEvent(t0, SpikeKind.POST), SpikeEvent(t0 - dt, SpikeKind.PRE)]


@dataclass
class Transient:
    t: np.ndarray
    v_g: np.ndarray
    i_syn: np.ndarray

    def to_csv(self, path) -> None:
        write_csv(path, TRANSIENT_HEADER, zip(self.t, self.v_g, self.i_syn))


def run_transient(state: SynapseState, events, params: SynapseParams, sample_times=(), v_read: float = 0.6):
    """Process ``events`` and record (t, v_g, I_syn) after every event and at each sample time."""
    # at equal times the sample is taken before the event
    items = [(e.t, 1, e) for e in events] + [(float(t), 0, None) for t in sample_times]
    items.sort(key=lambda x: (x[0], x[1]))
    rec = [(state.t_last, state.v_g)]
    for t, _, ev in items:
        state = apply_event(state, ev, params) if ev is not None else evolve(state, t, params)
        rec.append((t, float(state.v_g)))
    t, v = np.array(rec).T
    return state, Transient(t, v, conductance(v, params.mem) * v_read)


# ---------------------------------------------------------------------------
# STDP curve


@dataclass
class StdpCurve:
    dt: np.ndarray
    delta: np.ndarray
    closed_form: np.ndarray
    fit: dict

    @property
    def max_rel_error(self) -> float:
        return float(np.max(np.abs(self.delta - self.closed_form) / np.abs(self.closed_form)))

    def to_csv(self, path) -> None:
        write_csv(path, STDP_HEADER, zip(self.dt, self.delta))


def fit_stdp(dt, delta) -> dict:
    """Log-linear least squares on each side: ln|delta| = ln(gamma*A) - |dt|/tau."""
    dt = np.asarray(dt, dtype=float)
    delta = np.asarray(delta, dtype=float)
    out = {}
    for side, mask in (("p", dt >= 0), ("m", dt < 0)):
        x, y = np.abs(dt[mask]), delta[mask]
        if len(x) < 2 or np.any(y == 0) or np.ptp(x) == 0:
            raise ValueError(f"cannot fit the {'potentiation' if side == 'p' else 'depression'} side")
        slope, icpt = np.polyfit(x, np.log(np.abs(y)), 1)
        if slope >= 0:
            raise ValueError("fitted window does not decay")
        out[f"tau_{side}"] = -1.0 / slope
        out[f"gamma_a_{'plus' if side == 'p' else 'minus'}"] = float(np.exp(icpt))
    return out


def stdp_curve(params: SynapseParams, dt_max: float = 10e-6, steps: int = 41, spacing: float = 50e-6) -> StdpCurve:
    """Sweep dt over [-dt_max, dt_max] with one pairing every ``spacing`` seconds.

    The latch is switched off and every pairing starts from a fresh mid-rail
    synapse, so the measured change is the STDP window alone. The change is
    taken across the second spike of each pair, the one that samples the
    partner trace.
    """
    params = replace(params, latch_enabled=False)
    dts = np.linspace(-dt_max, dt_max, steps)
    delta = np.empty_like(dts)
    for k, d in enumerate(dts):
        first, second = pairing(k * spacing, float(d))
        s = SynapseState(v_g=params.v_dd / 2, t_last=k * spacing)
        s = apply_event(s, first, params)
        before = s.v_g
        s = apply_event(s, second, params)
        delta[k] = s.v_g - before
    return StdpCurve(dts, delta, np.asarray(stdp_delta(dts, params)), fit_stdp(dts, delta))


# ---------------------------------------------------------------------------
# repeated pairing (depression transient)


@dataclass
class DecayResult:
    on: Transient
    off: Transient
    v_on: np.ndarray  # v_g after each pairing, latch enabled
    v_off: np.ndarray
    interval_deviation: np.ndarray  # per interval, fraction of v_dd
    i_off: np.ndarray  # |I_syn| at the same samples as v_off

    @property
    def strictly_decreasing(self) -> bool:
        """Strict decrease of the latch-free samples until the 0 V clamp."""
        v = np.concatenate([[self.off.v_g[0]], self.v_off])
        for a, b in zip(v[:-1], v[1:]):
            if a <= 0.0:
                if b != 0.0:
                    return False
            elif not b < a:
                return False
        return True

    @property
    def current_non_increasing(self) -> bool:
        """|I_syn| per pairing never rises (it stops falling once the conductance clamps)."""
        i = np.concatenate([[abs(self.off.i_syn[0])], self.i_off])
        return bool(np.all(np.diff(i) <= 0))


def _pairing_events(n: int, dt: float, spacing: float, t0: float = 0.0):
    return [ev for k in range(n) for ev in pairing(t0 + (k + 1) * spacing, dt)]


def pairing_decay(params: SynapseParams, n: int = 20, dt: float = -1e-6, spacing: float = 50e-6,
                  v0: float | None = None, v_read: float = 0.6) -> DecayResult:
    v0 = params.v_dd if v0 is None else v0
    events = _pairing_events(n, dt, spacing)
    grid = np.arange(1, n + 2) * spacing  # samples just before each pairing (and one after the last)
    runs = {}
    for name, on in (("on", True), ("off", False)):
        p = replace(params, latch_enabled=on)
        _, tr = run_transient(SynapseState(v_g=v0), events, p, grid, v_read)
        idx = [np.flatnonzero(tr.t == grid[k + 1])[0] for k in range(n)]
        runs[name] = (tr, tr.v_g[idx], np.abs(tr.i_syn[idx]))

    # one interval at a time from the same (latch-enabled) state: with vs without latch
    dev = np.empty(n)
    start = SynapseState(v_g=v0)
    p_on, p_off = replace(params, latch_enabled=True), replace(params, latch_enabled=False)
    for k in range(n):
        t_end = (k + 2) * spacing
        evs = pairing((k + 1) * spacing, dt)
        a = evolve(_run(start, evs, p_on), t_end, p_on)
        b = evolve(_run(start, evs, p_off), t_end, p_off)
        dev[k] = abs(a.v_g - b.v_g) / params.v_dd
        start = a
    return DecayResult(runs["on"][0], runs["off"][0], runs["on"][1], runs["off"][1], dev, runs["off"][2])


def _run(state, events, params):
    for ev in events:
        state = apply_event(state, ev, params)
    return state


# ---------------------------------------------------------------------------
# bistability


@dataclass
class BistabilityCase:
    name: str
    pairings: int
    v_after_pairings: float
    transient: Transient
    final: LongTermState
    expected: LongTermState

    @property
    def passed(self) -> bool:
        return self.final is self.expected


def latch_only(v0: float, params: SynapseParams, duration: float, points: int = 200, v_read: float = 0.6):
    grid = np.linspace(0.0, duration, points + 1)[1:]
    state, tr = run_transient(SynapseState(v_g=v0), [], replace(params, latch_enabled=True), grid, v_read)
    return state, tr


def _potentiate(params, v0, n, dt, spacing, v_read):
    events = _pairing_events(n, dt, spacing)
    t_end = (n + 1) * spacing
    state, tr = run_transient(SynapseState(v_g=v0), events, params, [t_end], v_read)
    return state, tr


def bistability(params: SynapseParams, v0: float = 0.45, dt: float = 1e-6, spacing: float = 50e-6,
                settle_taus: float = 10.0, v_read: float = 0.6, max_pairings: int = 10_000):
    """Case (a): potentiating pairings until v_g crosses the latch threshold,
    then latch-only evolution. Case (b): one pairing fewer, so v_g stays below.
    """
    if v0 >= params.v_w_thr:
        raise ValueError("bistability experiment starts below the latch threshold")
    if stdp_delta(dt, params) <= 0:
        raise ValueError("pairing dt must potentiate")
    params = replace(params, latch_enabled=True)
    n_cross = None
    for n in range(1, max_pairings + 1):
        s, _ = _potentiate(params, v0, n, dt, spacing, v_read)
        if s.v_g > params.v_w_thr:
            n_cross = n
            break
    if n_cross is None:
        raise ValueError(f"v_g never crossed v_w_thr within {max_pairings} pairings")

    cases = []
    for name, n, expected in (("a", n_cross, LongTermState.LRS), ("b", n_cross - 1, LongTermState.HRS)):
        s, tr = _potentiate(params, v0, n, dt, spacing, v_read)
        grid = s.t_last + np.linspace(0.0, settle_taus * params.tau_w, 201)[1:]
        s2, tr2 = run_transient(s, [], params, grid, v_read)
        full = Transient(np.concatenate([tr.t, tr2.t[1:]]), np.concatenate([tr.v_g, tr2.v_g[1:]]),
                         np.concatenate([tr.i_syn, tr2.i_syn[1:]]))
        cases.append(BistabilityCase(name, n, float(s.v_g), full, long_term_state(s2, params), expected))
    return cases


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassificationRun:
    net: Network
    history: History
    evaluation: Evaluation
    settled: bool

    @property
    def accuracy(self) -> float:
        return self.evaluation.accuracy

    @property
    def distinct_weights(self) -> np.ndarray:
        return np.unique(self.net.weights)


def train_network(cfg: NetworkConfig, train: Dataset, epochs: int = 1) -> tuple[Network, History]:
    """Train, then (bistable mode) let the latch resolve every synapse."""
    net = Network(cfg)
    hist = net.train(train, epochs=epochs)
    if cfg.mode is Mode.BISTABLE:
        net.settle()
    return net, hist


def run_classification(cfg: NetworkConfig, train: Dataset, test: Dataset, digits=None, epochs: int = 1,
                       workers: int = 1) -> ClassificationRun:
    if digits is not None and set(digits) != set(range(10)):
        train, test = subset_digits(train, digits), subset_digits(test, digits)
    net, hist = train_network(cfg, train, epochs)
    return ClassificationRun(net, hist, evaluate(net, test, workers=workers), cfg.mode is Mode.BISTABLE)


def weight_pgm(bitmap: np.ndarray, w_min: float, w_max: float) -> str:
    """P2 (plain-text) PGM of one weight bitmap, w_min -> 0 and w_max -> 255."""
    level = np.rint(255 * (bitmap - w_min) / (w_max - w_min)).astype(int).clip(0, 255)
    h, w = level.shape
    body = "\n".join(" ".join(str(v) for v in row) for row in level)
    return f"P2\n{w} {h}\n255\n{body}\n"
