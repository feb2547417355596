"""Plain-text run configuration.

An INI file with one section per parameter group. Every key maps onto a field
of the matching dataclass; unknown sections or keys are errors. Values may be
overridden from the environment as ``NEUSOC_<SECTION>_<KEY>`` (upper case),
e.g. ``NEUSOC_NETWORK_SEED=3`` or ``NEUSOC_NETWORK_SYNAPSE_GAMMA=1e-3``.

``[network_synapse]`` holds overrides on top of the per-mode crossbar synapse
defaults; the single-synapse experiments use ``[synapse]``.
"""

from __future__ import annotations

import configparser
import enum
import os
import types
import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .energy import EnergyParams
from .memristor import MemristorParams, SineDrive
from .network import Mode, Network, NetworkConfig, NeuronParams, default_network_synapse
from .synapse import SynapseParams

ENV_PREFIX = "NEUSOC_"
MODEL_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentParams:
    # stdp-curve
    stdp_dt_max: float = 10e-6
    stdp_steps: int = 41
    pairing_spacing: float = 50e-6
    # pairing-decay
    decay_pairings: int = 20
    decay_dt: float = -1e-6
    decay_v0: float | None = None  # None: start at v_dd
    # bistability
    bistable_dt: float = 1e-6
    bistable_v0: float = 0.45
    settle_taus: float = 10.0
    # read-out voltage for the transient I_syn column
    v_read: float = 0.6
    residual_tol: float = 1e-12
    # classification
    digits: tuple = tuple(range(10))
    epochs: int = 1
    data_dir: str = ""
    workers: int = 1

    def __post_init__(self):
        if self.stdp_dt_max <= 0 or self.stdp_steps < 3:
            raise ValueError("stdp sweep needs stdp_dt_max > 0 and at least 3 steps")
        if self.pairing_spacing <= 2 * self.stdp_dt_max:
            raise ValueError("pairing_spacing must exceed twice stdp_dt_max")
        if self.decay_pairings < 0:
            raise ValueError("decay_pairings must be non-negative")
        if self.settle_taus <= 0:
            raise ValueError("settle_taus must be positive")
        if not self.digits or not all(0 <= d <= 9 for d in self.digits):
            raise ValueError("digits must be a non-empty subset of 0..9")
        if self.epochs < 0 or self.workers < 1:
            raise ValueError("epochs must be >= 0 and workers >= 1")


@dataclass(frozen=True)
class RunConfig:
    memristor: MemristorParams = field(default_factory=MemristorParams)
    drive: SineDrive = field(default_factory=SineDrive)
    synapse: SynapseParams = field(default_factory=SynapseParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    experiment: ExperimentParams = field(default_factory=ExperimentParams)

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, network=replace(self.network, seed=seed))


# section -> (dataclass, fields not settable from the file)
SECTIONS = {
    "memristor": (MemristorParams, ()),
    "drive": (SineDrive, ()),
    "synapse": (SynapseParams, ("mem",)),
    "energy": (EnergyParams, ()),
    "network": (NetworkConfig, ("synapse", "neuron")),
    "neuron": (NeuronParams, ()),
    "network_synapse": (SynapseParams, ("mem", "latch_enabled")),
    "experiment": (ExperimentParams, ()),
}


def _keys(section: str) -> dict[str, type]:
    cls, skip = SECTIONS[section]
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls) if f.name not in skip}


def _parse(text: str, tp, where: str):
    s = text.strip()
    args = typing.get_args(tp)
    if isinstance(tp, types.UnionType) or typing.get_origin(tp) is typing.Union:
        if s.lower() in ("none", ""):
            return None
        inner = [a for a in args if a is not type(None)]
        return _parse(s, inner[0], where)
    try:
        if tp is bool:
            low = s.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(s)
        if tp is int:
            return int(s)
        if tp is float:
            return float(s)
        if tp is str:
            return s
        if tp is tuple or typing.get_origin(tp) is tuple:
            return tuple(int(x) for x in s.replace(" ", "").split(",") if x)
        if isinstance(tp, type) and issubclass(tp, enum.Enum):
            return tp(s.lower())
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r} as {getattr(tp, '__name__', tp)}") from None
    raise ConfigError(f"{where}: unsupported type {tp}")


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def _env_overrides(environ) -> dict[str, dict[str, str]]:
    out: dict[str, dict[str, str]] = {}
    # longest section first so NETWORK_SYNAPSE_ wins over NETWORK_
    names = sorted(SECTIONS, key=len, reverse=True)
    for var, value in environ.items():
        if not var.startswith(ENV_PREFIX):
            continue
        rest = var[len(ENV_PREFIX):].lower()
        for sec in names:
            if rest.startswith(sec + "_"):
                key = rest[len(sec) + 1:]
                if key not in _keys(sec):
                    raise ConfigError(f"environment variable {var}: unknown key {key!r} in [{sec}]")
                out.setdefault(sec, {})[key] = value
                break
    return out


def _collect(raw: dict[str, dict[str, str]]) -> dict[str, dict]:
    vals: dict[str, dict] = {}
    for sec, items in raw.items():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        keys = _keys(sec)
        for key, text in items.items():
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            vals.setdefault(sec, {})[key] = _parse(text, keys[key], f"[{sec}] {key}")
    return vals


def build(vals: dict[str, dict]) -> RunConfig:
    def get(sec):
        return vals.get(sec, {})

    try:
        mem = MemristorParams(**get("memristor"))
        syn_kw = {"v_dd": mem.v_dd, **get("synapse")}
        synapse = SynapseParams(mem=mem, **syn_kw)
        net_kw = dict(get("network"))
        mode = net_kw.get("mode", Mode.ANALOG)
        nsyn = replace(default_network_synapse(mode), mem=mem, v_dd=mem.v_dd)
        nsyn = replace(nsyn, **get("network_synapse"))
        network = NetworkConfig(synapse=nsyn, neuron=NeuronParams(**get("neuron")), **net_kw)
        return RunConfig(
            memristor=mem,
            drive=SineDrive(**get("drive")),
            synapse=synapse,
            energy=EnergyParams(**get("energy")),
            network=network,
            experiment=ExperimentParams(**get("experiment")),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from None


def _read_ini(text: str, source: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return {sec: dict(cp[sec]) for sec in cp.sections()}


def load_config(path=None, environ=None, extra: dict | None = None) -> RunConfig:
    """Defaults, then ``path``, then environment overrides."""
    environ = os.environ if environ is None else environ
    raw: dict[str, dict[str, str]] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        raw = _read_ini(text, str(path))
    for sec, items in _env_overrides(environ).items():
        raw.setdefault(sec, {}).update(items)
    for sec, items in (extra or {}).items():
        raw.setdefault(sec, {}).update(items)
    return build(_collect(raw))


def to_ini(cfg: RunConfig) -> str:
    """Every parameter, fully spelled out, in a form :func:`load_config` reads back."""
    objs = {
        "memristor": cfg.memristor,
        "drive": cfg.drive,
        "synapse": cfg.synapse,
        "energy": cfg.energy,
        "network": cfg.network,
        "neuron": cfg.network.neuron,
        "network_synapse": cfg.network.synapse,
        "experiment": cfg.experiment,
    }
    lines = []
    for sec, obj in objs.items():
        lines.append(f"[{sec}]")
        for key in _keys(sec):
            lines.append(f"{key} = {_format(getattr(obj, key))}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# model files


class ModelError(ValueError):
    pass


def save_model(path, cfg: RunConfig, net: Network) -> None:
    head = [
        "# neusoc model: trained crossbar state plus the full configuration",
        "[model]",
        f"schema_version = {MODEL_SCHEMA_VERSION}",
        f"samples_seen = {net.samples_seen}",
        f"time_s = {net.t!r}",
        "",
    ]
    rows = ["[v_g]"] + [f"row_{i:02d} = " + ",".join(repr(float(v)) for v in r) for i, r in enumerate(net.v_g)]
    Path(path).write_text("\n".join(head) + to_ini(cfg) + "\n".join(rows) + "\n")


def load_model(path) -> tuple[RunConfig, Network]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc.strerror}") from None
    raw = _read_ini(text, str(path))
    model = raw.pop("model", None)
    vg = raw.pop("v_g", None)
    if model is None or vg is None:
        raise ModelError(f"{path}: not a model file (missing [model] or [v_g])")
    version = model.get("schema_version")
    if version != str(MODEL_SCHEMA_VERSION):
        raise ModelError(f"{path}: model schema version {version!r}, expected {MODEL_SCHEMA_VERSION}")
    try:
        cfg = build(_collect(raw))
    except ConfigError as exc:
        raise ModelError(f"{path}: {exc}") from None
    try:
        v_g = np.array([[float(x) for x in vg[f"row_{i:02d}"].split(",")] for i in range(cfg.network.n_in)])
    except (KeyError, ValueError) as exc:
        raise ModelError(f"{path}: malformed weight rows ({exc})") from None
    if v_g.shape != (cfg.network.n_in, cfg.network.n_out):
        raise ModelError(f"{path}: weight matrix has shape {v_g.shape}")
    net = Network(cfg.network, v_g)
    net.samples_seen = int(model.get("samples_seen", 0))
    net.t = float(model.get("time_s", 0.0))
    return cfg, net
