"""Event-driven 64 -> 10 winner-take-all spiking network with STDP synapses.

Inputs are Poisson rate-coded pixels. Every input spike applies the
presynaptic half of STDP to its row of synapses and adds that row's weights
to the leaky output membranes. The first output to cross threshold fires,
applies the postsynaptic half of STDP to its column, resets every membrane
and silences the whole layer for the refractory window (hard WTA). During
training a teacher current is injected into the labeled output at every input
event so that it wins the race.

Synapse state is the memristor gate voltage ``v_g``; the weight seen by the
neuron is the affine map ``w = w_min + (w_max - w_min) * v_g / v_dd``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .data import MAX_PIXEL, N_PIXELS, Dataset
from .synapse import SynapseParams, latch

NO_LABEL = -1


class Mode(enum.Enum):
    ANALOG = "analog"
    BISTABLE = "bistable"


@dataclass(frozen=True)
class NeuronParams:
    # threshold and leak are tuned to ~2000 input events per 50 us sample at 2 MHz
    threshold: float = 120.0
    leak_tau: float = 50e-6
    refractory: float = 2e-6

    def __post_init__(self):
        if self.threshold <= 0 or self.leak_tau <= 0 or self.refractory < 0:
            raise ValueError("threshold and leak_tau must be positive, refractory non-negative")


def default_network_synapse(mode: Mode = Mode.ANALOG) -> SynapseParams:
    """Synapse settings used inside the crossbar.

    The traces are shorter than in the single-synapse experiments: at a 2 MHz
    input rate a 2 us trace would be resampled before it decays, and the
    weight would track only whether a pixel is on, not how bright it is.
    Steps are small in analog mode (a class sees ~380 presentations per
    epoch). In bistable mode each presentation must move a bright pixel a
    sizeable fraction of the way to the latch threshold, or the latch pulls
    it back to HRS before the class comes around again.
    """
    gamma = 0.09 if mode is Mode.BISTABLE else 6e-4
    return SynapseParams(gamma=gamma, a_plus=0.5, a_minus=0.02, tau_p=0.25e-6, tau_m=0.25e-6)


@dataclass(frozen=True)
class NetworkConfig:
    n_in: int = N_PIXELS
    n_out: int = 10
    synapse: SynapseParams | None = None  # None: default_network_synapse(mode)
    neuron: NeuronParams = field(default_factory=NeuronParams)
    sample_duration: float = 50e-6
    gap: float = 10e-6
    max_input_rate: float = 2e6
    teacher_strength: float = 10.0
    w_min: float = 0.01
    w_max: float = 1.0
    v_g_init: float = 0.0
    mode: Mode = Mode.ANALOG
    max_samples: int | None = None
    history_stride: int = 100
    seed: int = 1

    def __post_init__(self):
        if self.synapse is None:
            object.__setattr__(self, "synapse", default_network_synapse(self.mode))
        if self.n_in <= 0 or self.n_out <= 0:
            raise ValueError("n_in and n_out must be positive")
        if not 0 < self.w_min < self.w_max <= 1:
            raise ValueError("need 0 < w_min < w_max <= 1")
        if self.sample_duration <= 0 or self.max_input_rate < 0 or self.teacher_strength < 0:
            raise ValueError("sample_duration must be positive; rates and teacher non-negative")
        if self.gap < 5 * max(self.synapse.tau_p, self.synapse.tau_m):
            raise ValueError("inter-sample gap must be at least 5 trace time-constants")
        if not 0 <= self.v_g_init <= self.synapse.v_dd:
            raise ValueError("v_g_init outside [0, v_dd]")
        if self.max_samples is not None and self.max_samples < 0:
            raise ValueError("max_samples must be non-negative")
        if self.history_stride <= 0:
            raise ValueError("history_stride must be positive")

    @property
    def effective_synapse(self) -> SynapseParams:
        return replace(self.synapse, latch_enabled=self.mode is Mode.BISTABLE)

    @property
    def sample_limit(self) -> int | None:
        if self.max_samples is not None:
            return self.max_samples
        return 500 if self.mode is Mode.BISTABLE else None


# ---------------------------------------------------------------------------
# input encoding


def encode_image(pixels, cfg: NetworkConfig, key: tuple[int, ...]) -> list[np.ndarray]:
    """Poisson spike times (seconds from sample onset) for each input channel.

    Channel ``i`` draws from its own substream ``SeedSequence(cfg.seed,
    spawn_key=(*key, i))``, so the trains do not depend on the order in which
    channels or samples are generated.
    """
    pixels = np.asarray(pixels)
    if pixels.shape != (cfg.n_in,):
        raise ValueError(f"expected {cfg.n_in} pixels, got shape {pixels.shape}")
    if pixels.min() < 0 or pixels.max() > MAX_PIXEL:
        raise ValueError("pixel out of range 0..16")
    trains = []
    for i, p in enumerate(pixels):
        rate = p / MAX_PIXEL * cfg.max_input_rate
        if rate == 0:
            trains.append(np.empty(0))
            continue
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(*key, i)))
        n = rng.poisson(rate * cfg.sample_duration)
        trains.append(np.sort(rng.uniform(0.0, cfg.sample_duration, n)))
    return trains


def merge_trains(trains) -> tuple[np.ndarray, np.ndarray]:
    """Flatten per-channel trains into time-sorted (times, channels); ties go to the lower channel."""
    times = np.concatenate([np.asarray(t, dtype=float) for t in trains]) if trains else np.empty(0)
    chans = np.concatenate([np.full(len(t), i, dtype=np.int64) for i, t in enumerate(trains)]) if trains else np.empty(0, np.int64)
    order = np.lexsort((chans, times))
    return times[order], chans[order]


# ---------------------------------------------------------------------------
# event kernel


@numba.njit(cache=True)
def _run_events(
    times, chans, t0, v_g, pre_last, post_last, state,
    label, train, teacher,
    a_plus, a_minus, tau_p, tau_m, gamma, v_dd,
    latch_on, tau_w, v_thr,
    threshold, leak_tau, refractory, w_min, w_max,
    counts, first_spike, fire_t, fire_k,
):
    """Process one presentation. ``state`` = [t_last, refractory_until, membrane_0..n_out-1].

    Output spikes are logged to ``fire_t``/``fire_k`` (one slot per input event suffices).
    """
    n_in, n_out = v_g.shape
    w_scale = (w_max - w_min) / v_dd
    for e in range(times.shape[0]):
        t = t0 + times[e]
        i = chans[e]
        dt = t - state[0]
        if dt < 0:
            raise ValueError("events out of order")
        if dt > 0:
            if latch_on:
                g = math.exp(dt / tau_w)
                for a in range(n_in):
                    for b in range(n_out):
                        v = v_thr + (v_g[a, b] - v_thr) * g
                        v_g[a, b] = min(max(v, 0.0), v_dd)
            decay = math.exp(-dt / leak_tau)
            for k in range(n_out):
                state[2 + k] *= decay
            state[0] = t
        if train:
            for k in range(n_out):
                if post_last[k] > -np.inf:
                    v = v_g[i, k] - gamma * a_minus * math.exp(-(t - post_last[k]) / tau_m)
                    v_g[i, k] = min(max(v, 0.0), v_dd)
        pre_last[i] = t
        if t < state[1]:
            continue
        for k in range(n_out):
            state[2 + k] += w_min + w_scale * v_g[i, k]
        if label >= 0:
            state[2 + label] += teacher
        winner = -1
        best = threshold
        for k in range(n_out):
            if state[2 + k] >= best and (winner < 0 or state[2 + k] > best):
                winner = k
                best = state[2 + k]
        if winner < 0:
            continue
        n_fired = 0
        for k in range(n_out):
            n_fired += counts[k]
        fire_t[n_fired] = t
        fire_k[n_fired] = winner
        counts[winner] += 1
        if first_spike[0] < 0:
            first_spike[0] = winner
        if train:
            for a in range(n_in):
                if pre_last[a] > -np.inf:
                    v = v_g[a, winner] + gamma * a_plus * math.exp(-(t - pre_last[a]) / tau_p)
                    v_g[a, winner] = min(max(v, 0.0), v_dd)
            post_last[winner] = t
        for k in range(n_out):
            state[2 + k] = 0.0
        state[1] = t + refractory


# ---------------------------------------------------------------------------


@dataclass
class SampleResult:
    counts: np.ndarray
    first: int  # first output to fire, -1 if none
    spike_times: np.ndarray = field(default_factory=lambda: np.empty(0))  # absolute, seconds
    spike_neurons: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    @property
    def prediction(self) -> int:
        return predict(self.counts)


def predict(counts) -> int:
    """Argmax of spike counts; ties resolve to the lowest index (so silence predicts 0)."""
    return int(np.argmax(counts))


@dataclass
class History:
    sample_idx: list = field(default_factory=list)
    accuracy_running: list = field(default_factory=list)
    mean_w: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("sample_idx,accuracy_running,mean_w\n")
            for row in zip(self.sample_idx, self.accuracy_running, self.mean_w):
                fh.write(f"{row[0]},{float(row[1])!r},{float(row[2])!r}\n")


class Network:
    def __init__(self, cfg: NetworkConfig, v_g: np.ndarray | None = None):
        self.cfg = cfg
        shape = (cfg.n_in, cfg.n_out)
        if v_g is None:
            v_g = np.full(shape, cfg.v_g_init)
        v_g = np.array(v_g, dtype=float)
        if v_g.shape != shape:
            raise ValueError(f"v_g must have shape {shape}")
        self.v_g = v_g
        self.t = 0.0
        self.samples_seen = 0
        self.pre_last = np.full(cfg.n_in, -np.inf)
        self.post_last = np.full(cfg.n_out, -np.inf)

    @property
    def weights(self) -> np.ndarray:
        c = self.cfg
        return c.w_min + (c.w_max - c.w_min) * self.v_g / c.synapse.v_dd

    def copy(self) -> Network:
        net = Network(self.cfg, self.v_g.copy())
        net.t, net.samples_seen = self.t, self.samples_seen
        net.pre_last, net.post_last = self.pre_last.copy(), self.post_last.copy()
        return net

    def present_sample(self, trains, label: int | None = None, train: bool = False) -> SampleResult:
        """Run one presentation starting at the network's current time.

        ``trains`` holds per-channel spike times relative to the sample onset.
        Time then advances by ``sample_duration + gap``.
        """
        cfg = self.cfg
        syn = cfg.effective_synapse
        for tr in trains:
            if len(tr) > 1 and np.any(np.diff(tr) < 0):
                raise ValueError("spike train not sorted in time")
        times, chans = merge_trains(trains)
        if len(times) and (times[0] < 0 or times[-1] > cfg.sample_duration):
            raise ValueError("spike outside the sample window")
        if label is not None and not 0 <= label < cfg.n_out:
            raise ValueError(f"label {label} out of range")
        t0 = self.t
        state = np.zeros(2 + cfg.n_out)
        state[0] = t0
        counts = np.zeros(cfg.n_out, dtype=np.int64)
        first = np.full(1, -1, dtype=np.int64)
        fire_t = np.empty(len(times))
        fire_k = np.empty(len(times), dtype=np.int64)
        teacher_label = label if (train and label is not None) else NO_LABEL
        _run_events(
            times, chans, t0, self.v_g, self.pre_last, self.post_last, state,
            teacher_label, train, cfg.teacher_strength,
            syn.a_plus, syn.a_minus, syn.tau_p, syn.tau_m, syn.gamma, syn.v_dd,
            syn.latch_enabled, syn.tau_w, syn.v_w_thr,
            cfg.neuron.threshold, cfg.neuron.leak_tau, cfg.neuron.refractory, cfg.w_min, cfg.w_max,
            counts, first, fire_t, fire_k,
        )
        self.advance_to(t0 + cfg.sample_duration + cfg.gap)
        n = int(counts.sum())
        return SampleResult(counts, int(first[0]), fire_t[:n].copy(), fire_k[:n].copy())

    def advance_to(self, t: float) -> None:
        """Let the synapses evolve without spikes until ``t`` (latch only; traces are lazy)."""
        if t < self.t:
            raise ValueError("time moved backwards")
        syn = self.cfg.effective_synapse
        self.v_g = np.asarray(latch(self.v_g, t - self.t, syn), dtype=float)
        self.t = t

    def settle(self, n_tau: float = 10.0) -> None:
        """Latch-only evolution for ``n_tau`` regeneration time-constants, then snap to the rails.

        A synapse sitting exactly on the latch threshold never resolves on its
        own; it is assigned by the side of the threshold it is on (>= -> LRS).
        """
        syn = self.cfg.effective_synapse
        if not syn.latch_enabled:
            return
        self.advance_to(self.t + n_tau * syn.tau_w)
        self.v_g = np.where(self.v_g >= syn.v_w_thr, syn.v_dd, 0.0)

    def train(self, ds: Dataset, epochs: int = 1, max_samples: int | None = None) -> History:
        cfg = self.cfg
        limit = cfg.sample_limit if max_samples is None else max_samples
        hist = History()
        correct = seen = 0
        for epoch in range(epochs):
            for n, (pixels, label) in enumerate(ds):
                if limit is not None and seen >= limit:
                    return hist
                trains = encode_image(pixels, cfg, key=(0, epoch, n))
                res = self.present_sample(trains, int(label), train=True)
                seen += 1
                self.samples_seen += 1
                correct += int(res.prediction == label)
                if seen % cfg.history_stride == 0:
                    hist.sample_idx.append(seen)
                    hist.accuracy_running.append(correct / seen)
                    hist.mean_w.append(float(self.weights.mean()))
                    hist.snapshots.append(self.weights.copy())
        return hist

    def classify(self, pixels, key) -> SampleResult:
        """Inference on one image with STDP and teacher off; leaves the network untouched."""
        probe = self.copy()
        probe.pre_last[:] = -np.inf
        probe.post_last[:] = -np.inf
        return probe.present_sample(encode_image(pixels, self.cfg, key=key), train=False)

    def export_weight_maps(self) -> np.ndarray:
        """(n_out, 8, 8) weight bitmaps, one per output neuron, row-major."""
        side = int(round(math.sqrt(self.cfg.n_in)))
        return self.weights.T.reshape(self.cfg.n_out, side, side).copy()


@dataclass
class Evaluation:
    accuracy: float
    confusion: np.ndarray  # [true, predicted]
    predictions: np.ndarray


def _eval_chunk(net: Network, pixels, indices) -> list[int]:
    return [net.classify(pixels[j], key=(1, int(j))).prediction for j in indices]


def evaluate(net: Network, ds: Dataset, workers: int = 1) -> Evaluation:
    if len(ds) == 0:
        raise ValueError("empty dataset")
    idx = np.arange(len(ds))
    if workers <= 1:
        preds = _eval_chunk(net, ds.pixels, idx)
    else:
        chunks = np.array_split(idx, workers)
        with ProcessPoolExecutor(workers) as ex:
            parts = ex.map(_eval_chunk, [net] * len(chunks), [ds.pixels] * len(chunks), chunks)
            preds = [p for part in parts for p in part]
    preds = np.array(preds)
    n = net.cfg.n_out
    confusion = np.zeros((n, n), dtype=np.int64)
    np.add.at(confusion, (ds.labels, preds), 1)
    return Evaluation(float(np.mean(preds == ds.labels)), confusion, preds)
