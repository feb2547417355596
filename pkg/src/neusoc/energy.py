"""Closed-form energy model of a memristive spiking-network SoC.

Per event, with synaptic spike energy ``E_spk = V^2 T_p / R_LRS``::

    E_SNN = eta_sp * eta_lrs * N_s * M * E_spk + N_n * E_N

where ``M`` is the number of binary devices in a compound synapse and
``E_N = P_n * T_p`` the energy of one neuron per event. Peripheral circuits
are ignored.

The published table lists a 300 mV spike amplitude, but its E_spk and E_SNN
rows are reproduced only with a 1.2 V effective spike voltage and M = 16
(a 4-bit compound synapse). Both voltages are kept: ``v_p`` for the record,
``v_eff`` for the arithmetic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

# Neuron energies per event listed for the three LRS columns.
REFERENCE_NEURON_ENERGY = {100e3: 1.56e-12, 1e6: 260e-15, 10e6: 43.3e-15}
REFERENCE_LABELS = {100e3: "Low", 1e6: "Medium", 10e6: "High"}

CSV_HEADER = ["label", "R_lrs_ohm", "E_spk_J", "E_N_J", "E_SNN_J", "img_per_s_per_W", "accel_over_gpu"]
SWEEP_AXES = ("r_lrs", "t_p", "v_eff", "eta_sp", "devices")


@dataclass(frozen=True)
class EnergyParams:
    v_p: float = 0.3
    v_eff: float = 1.2
    t_p: float = 100e-9
    r_lrs: float = 1e6
    r_hrs: float = 100e6
    eta_sp: float = 0.6
    eta_lrs: float = 0.5
    n_s: float = 61e6  # AlexNet-sized synapse count
    n_n: float = 640e3
    p_n: float = 260e-15 / 100e-9  # W; E_N = p_n * t_p
    devices_per_synapse: int = 16
    gpu_baseline: float = 170.0  # images/s/W, Nvidia P4

    def __post_init__(self):
        if not (0 <= self.eta_sp <= 1 and 0 <= self.eta_lrs <= 1):
            raise ValueError("eta_sp and eta_lrs must lie in [0, 1]")
        if self.r_lrs <= 0 or self.r_hrs <= 0:
            raise ValueError("resistances must be positive")
        if self.r_hrs <= self.r_lrs:
            raise ValueError("r_hrs must exceed r_lrs")
        if self.t_p <= 0:
            raise ValueError("t_p must be positive")
        if min(self.n_s, self.n_n, self.p_n, self.devices_per_synapse) < 0:
            raise ValueError("counts and powers must be non-negative")
        if self.gpu_baseline <= 0:
            raise ValueError("gpu_baseline must be positive")

    @property
    def e_n(self) -> float:
        return self.p_n * self.t_p

    def with_neuron_energy(self, e_n: float) -> EnergyParams:
        """Same parameters with the per-event neuron energy given directly."""
        return replace(self, p_n=e_n / self.t_p)


@dataclass(frozen=True)
class EnergyRow:
    label: str
    r_lrs: float
    e_spk: float
    e_n: float
    e_snn: float
    images_per_s_per_w: float
    acceleration: float

    def csv_row(self):
        nums = (self.r_lrs, self.e_spk, self.e_n, self.e_snn, self.images_per_s_per_w, self.acceleration)
        return [self.label] + [repr(float(x)) for x in nums]


def spike_energy(v_eff: float, t_p: float, r: float) -> float:
    if r <= 0 or t_p <= 0:
        raise ValueError("r and t_p must be positive")
    return v_eff**2 * t_p / r


def event_energy(p: EnergyParams) -> float:
    synaptic = p.eta_sp * p.eta_lrs * p.n_s * p.devices_per_synapse * spike_energy(p.v_eff, p.t_p, p.r_lrs)
    return synaptic + p.n_n * p.p_n * p.t_p


def throughput(e_snn: float) -> float:
    if not e_snn > 0:
        raise ValueError("energy per image must be positive")
    return 1.0 / e_snn


def gpu_acceleration(images_per_s_per_w: float, baseline: float) -> float:
    if not baseline > 0:
        raise ValueError("baseline must be positive")
    return images_per_s_per_w / baseline


def reference_params(r_lrs: float = 1e6) -> EnergyParams:
    """Inputs of the published energy table for one LRS column."""
    return EnergyParams(r_lrs=r_lrs).with_neuron_energy(REFERENCE_NEURON_ENERGY[r_lrs])


def row(p: EnergyParams, label: str | None = None) -> EnergyRow:
    e_snn = event_energy(p)
    tput = throughput(e_snn)
    return EnergyRow(
        label=label or REFERENCE_LABELS.get(p.r_lrs, f"R={p.r_lrs:g}"),
        r_lrs=p.r_lrs,
        e_spk=spike_energy(p.v_eff, p.t_p, p.r_lrs),
        e_n=p.e_n,
        e_snn=e_snn,
        images_per_s_per_w=tput,
        acceleration=gpu_acceleration(tput, p.gpu_baseline),
    )


def render_table(base: EnergyParams, r_values, neuron_energy: dict | None = None) -> list[EnergyRow]:
    """One row per LRS resistance.

    ``neuron_energy`` maps resistance -> E_N. The published table pairs each
    resistance with its own neuron energy (an opamp driving a higher-resistance
    load draws less), so by default the published values are used where known
    and ``base.e_n`` elsewhere.
    """
    r_values = list(r_values)
    if not r_values:
        raise ValueError("r_values must be non-empty")
    neuron_energy = REFERENCE_NEURON_ENERGY if neuron_energy is None else neuron_energy
    rows = []
    for r in r_values:
        p = replace(base, r_lrs=r, r_hrs=max(base.r_hrs, 10 * r))
        if r in neuron_energy:
            p = p.with_neuron_energy(neuron_energy[r])
        rows.append(row(p))
    return rows


def format_table(rows: list[EnergyRow]) -> str:
    def eng(x, unit):
        for scale, prefix in ((1, ""), (1e-3, "m"), (1e-6, "u"), (1e-9, "n"), (1e-12, "p"), (1e-15, "f")):
            if abs(x) >= scale:
                return f"{x / scale:.4g} {prefix}{unit}"
        return f"{x:.3g} {unit}"

    def kilo(x):
        return f"{x / 1e3:.3g}k" if x >= 1e3 else f"{x:.3g}"

    lines = [
        ("", [r.label for r in rows]),
        ("R_LRS", [eng(r.r_lrs, "Ohm") for r in rows]),
        ("E_spk", [eng(r.e_spk, "J") for r in rows]),
        ("E_N", [eng(r.e_n, "J") for r in rows]),
        ("E_SNN", [eng(r.e_snn, "J") for r in rows]),
        ("Images/s/W", [kilo(r.images_per_s_per_w) for r in rows]),
        ("Accel. over GPU", ["x" + kilo(r.acceleration) for r in rows]),
    ]
    w0 = max(len(a) for a, _ in lines)
    w = max(len(c) for _, cells in lines for c in cells)
    return "\n".join(f"{a:<{w0}}  " + "  ".join(f"{c:>{w}}" for c in cells) for a, cells in lines)


def write_table_csv(rows: list[EnergyRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.csv_row())


def sweep(base: EnergyParams, axis: str, values) -> list[tuple[float, float, float, float]]:
    """Rows of (axis value, E_SNN, images/s/W, GPU acceleration), other inputs fixed."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise ValueError("sweep range is empty")
    field_name = {"devices": "devices_per_synapse"}.get(axis, axis)
    out = []
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite sweep value {v!r}")
        kw = {field_name: int(v) if axis == "devices" else float(v)}
        if axis == "r_lrs":
            kw["r_hrs"] = max(base.r_hrs, 10 * v)
        p = replace(base, **kw)
        r = row(p)
        out.append((float(v), r.e_snn, r.images_per_s_per_w, r.acceleration))
    return out


def sweep_values(start: float, stop: float, num: int, log: bool = False) -> np.ndarray:
    if num < 1:
        raise ValueError("num must be >= 1")
    if log:
        if start <= 0 or stop <= 0:
            raise ValueError("log sweep needs positive bounds")
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)
