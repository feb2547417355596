"""``neusoc`` command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import energy
from .config import ConfigError, ModelError, load_config, load_model, save_model, to_ini
from .data import DatasetError, find_optdigits, load_optdigits, subset_digits
from .experiments import (
    bistability,
    hysteresis,
    latch_only,
    pairing_decay,
    stdp_curve,
    train_network,
    weight_pgm,
    write_csv,
)
from .network import Mode, Network, evaluate
from .synapse import long_term_state

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


class CliError(Exception):
    """I/O or configuration problem; maps to exit code 2."""


def _write_metrics(path: Path, items: dict) -> None:
    path.write_text("".join(f"{k} = {v}\n" for k, v in items.items()))


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


# ---------------------------------------------------------------------------


def cmd_hysteresis(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    res = hysteresis(cfg.memristor, cfg.drive, cfg.experiment.residual_tol)
    res.trace.to_csv(out / "iv_trace.csv")
    _write_metrics(out / "hysteresis_metrics.txt", {
        "origin_residual_A": repr(res.origin_residual),
        "loop_area_VA": repr(res.loop_area),
        "dt_halving_change": repr(res.dt_halving_change),
        "degenerate": res.degenerate,
        "passed": res.passed,
    })
    print(f"origin residual {res.origin_residual:.3g} A, loop area {res.loop_area:.4g} V*A, "
          f"dt-halving change {100 * res.dt_halving_change:.3g}%")
    if res.degenerate:
        print("degenerate loop: zero enclosed area")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_stdp_curve(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    e = cfg.experiment
    try:
        curve = stdp_curve(cfg.synapse, e.stdp_dt_max, e.stdp_steps, e.pairing_spacing)
    except ValueError as exc:
        print(f"stdp-curve: {exc}", file=sys.stderr)
        return EXIT_FAIL
    curve.to_csv(out / "stdp_curve.csv")
    f = curve.fit
    tau_err = max(abs(f["tau_p"] / cfg.synapse.tau_p - 1), abs(f["tau_m"] / cfg.synapse.tau_m - 1))
    ok = curve.max_rel_error <= 1e-9 and tau_err <= 0.05
    _write_metrics(out / "stdp_fit.txt", {
        **{k: repr(float(v)) for k, v in f.items()},
        "max_rel_error_vs_closed_form": repr(curve.max_rel_error),
        "passed": ok,
    })
    print(f"tau_p {f['tau_p']:.4g} s, tau_m {f['tau_m']:.4g} s, gamma*A+ {f['gamma_a_plus']:.4g} V, "
          f"gamma*A- {f['gamma_a_minus']:.4g} V, max rel. error {curve.max_rel_error:.2g}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bistability(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    e = cfg.experiment
    syn = cfg.synapse
    ok = True
    if args.v0 is not None:
        # latch-only run from an arbitrary start (e.g. exactly v_w_thr)
        state, tr = latch_only(args.v0, syn, e.settle_taus * syn.tau_w, v_read=e.v_read)
        tr.to_csv(out / "bistability_latch.csv")
        lts = long_term_state(state, syn)
        print(f"v_g {args.v0} V -> {state.v_g:.6g} V after {e.settle_taus:g} tau_w: {lts.value}")
        return EXIT_OK
    try:
        cases = bistability(syn, e.bistable_v0, e.bistable_dt, e.pairing_spacing, e.settle_taus, e.v_read)
    except ValueError as exc:
        print(f"bistability: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for c in cases:
        c.transient.to_csv(out / f"bistability_{c.name}.csv")
        print(f"case {c.name}: {c.pairings} pairings -> v_g {c.v_after_pairings:.4f} V, "
              f"final {c.final.value} (expected {c.expected.value})")
        ok &= c.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_pairing_decay(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    e = cfg.experiment
    n = e.decay_pairings if args.n is None else args.n
    if n < 0:
        raise CliError("--n must be non-negative")
    res = pairing_decay(cfg.synapse, n, e.decay_dt, e.pairing_spacing, e.decay_v0, e.v_read)
    res.on.to_csv(out / "pairing_decay.csv")
    res.off.to_csv(out / "pairing_decay_nolatch.csv")
    worst = float(res.interval_deviation.max()) if n else 0.0
    ok = res.strictly_decreasing and res.current_non_increasing and worst < 0.025
    _write_metrics(out / "pairing_decay_metrics.txt", {
        "pairings": n,
        "strictly_decreasing": res.strictly_decreasing,
        "current_non_increasing": res.current_non_increasing,
        "max_interval_deviation": repr(worst),
        "passed": ok,
    })
    print(f"{n} pairings: v_g {res.off.v_g[0]:.4f} -> {res.off.v_g[-1]:.4f} V (latch off), "
          f"max latch deviation per interval {100 * worst:.3g}% of v_dd")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_energy_table(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    t0 = time.perf_counter()
    rows = energy.render_table(cfg.energy, sorted(energy.REFERENCE_NEURON_ENERGY))
    energy.write_table_csv(rows, out / "energy_table.csv")
    print(energy.format_table(rows))
    print(f"({1e3 * (time.perf_counter() - t0):.1f} ms)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    try:
        values = energy.sweep_values(args.start, args.stop, args.num, args.log)
        rows = energy.sweep(cfg.energy, args.axis, values)
    except ValueError as exc:
        raise CliError(f"sweep: {exc}") from None
    path = out / f"sweep_{args.axis}.csv"
    write_csv(path, [args.axis, "E_SNN_J", "img_per_s_per_W", "accel_over_gpu"], rows)
    for v, e_snn, tput, acc in rows:
        print(f"{args.axis}={v:<12.4g} E_SNN={e_snn:.4g} J  {tput:.4g} img/s/W  x{acc:.4g}")
    return EXIT_OK


def _datasets(cfg, args):
    data_dir = args.data_dir or cfg.experiment.data_dir or None
    try:
        tra, tes = find_optdigits(data_dir)
        return load_optdigits(tra), load_optdigits(tes)
    except (FileNotFoundError, DatasetError) as exc:
        raise CliError(str(exc)) from None


def _digits(cfg, args):
    if args.digits:
        try:
            return tuple(int(d) for d in args.digits.split(","))
        except ValueError:
            raise CliError(f"--digits: expected comma-separated integers, got {args.digits!r}") from None
    return cfg.experiment.digits


def cmd_train(args) -> int:
    cfg = _load(args)
    if args.mode:
        mode = Mode(args.mode)
        if mode is not cfg.network.mode:
            cfg = load_config(args.config, extra={"network": {"mode": mode.value}})
            if args.seed is not None:
                cfg = cfg.with_seed(args.seed)
    out = _outdir(args)
    train, _ = _datasets(cfg, args)
    digits = _digits(cfg, args)
    try:
        if set(digits) != set(range(10)):
            train = subset_digits(train, digits)
    except DatasetError as exc:
        raise CliError(str(exc)) from None
    epochs = cfg.experiment.epochs if args.epochs is None else args.epochs
    net_cfg = cfg.network if args.max_samples is None else replace(cfg.network, max_samples=args.max_samples)
    cfg = replace(cfg, network=net_cfg, experiment=replace(cfg.experiment, digits=tuple(sorted(set(digits)))))
    t0 = time.perf_counter()
    net, hist = train_network(net_cfg, train, epochs)
    save_model(out / "model.txt", cfg, net)
    hist.to_csv(out / "history.csv")
    print(f"trained {net.samples_seen} samples ({cfg.network.mode.value}) in {time.perf_counter() - t0:.1f} s "
          f"-> {out / 'model.txt'}")
    return EXIT_OK


def _model(args):
    try:
        return load_model(args.model)
    except ModelError as exc:
        raise CliError(str(exc)) from None


def cmd_eval(args) -> int:
    if args.untrained:
        cfg = _load(args)
        net = Network(cfg.network)
    else:
        cfg, net = _model(args)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
            net.cfg = cfg.network
    out = _outdir(args)
    _, test = _datasets(cfg, args)
    digits = _digits(cfg, args)
    try:
        if set(digits) != set(range(10)):
            test = subset_digits(test, digits)
    except DatasetError as exc:
        raise CliError(str(exc)) from None
    workers = args.workers or cfg.experiment.workers
    t0 = time.perf_counter()
    ev = evaluate(net, test, workers=workers)
    _write_metrics(out / "eval_metrics.txt", {
        "accuracy": repr(ev.accuracy),
        "n_test": len(test),
        "digits": ",".join(map(str, sorted(set(digits)))),
    })
    np.savetxt(out / "confusion.csv", ev.confusion, fmt="%d", delimiter=",")
    print(f"accuracy {ev.accuracy:.4f} on {len(test)} test images ({time.perf_counter() - t0:.1f} s)")
    return EXIT_OK


def cmd_weights_bitmap(args) -> int:
    cfg, net = _model(args)
    out = _outdir(args)
    maps = net.export_weight_maps()
    for k, m in enumerate(maps):
        (out / f"weights_{k}.pgm").write_text(weight_pgm(m, cfg.network.w_min, cfg.network.w_max))
        np.savetxt(out / f"weights_{k}.csv", m, delimiter=",", fmt="%r")
    print(f"{len(maps)} weight maps, {len(np.unique(maps))} distinct values -> {out}")
    return EXIT_OK


def cmd_show_config(args) -> int:
    print(to_ini(_load(args)), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; omitted keys keep their defaults")
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help="overrides [network] seed")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data-dir", help="directory holding optdigits.tra/.tes")
    data.add_argument("--digits", help="comma-separated digit subset, e.g. 0,1,2,3")

    p = argparse.ArgumentParser(prog="neusoc", description="Memristive STDP synapse and SNN simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("hysteresis", parents=[common], help="pinched I-V loop of the memristor emulator")
    sub.add_parser("stdp-curve", parents=[common], help="STDP window from event-driven pairings")
    s = sub.add_parser("bistability", parents=[common], help="long-term potentiation/depression via the latch")
    s.add_argument("--v0", type=float, help="latch-only run from this v_g instead of the two pairing cases")
    s = sub.add_parser("pairing-decay", parents=[common], help="repeated depressing pairings")
    s.add_argument("--n", type=int, help="number of pairings (default from config)")
    sub.add_parser("energy-table", parents=[common], help="per-event energy table")
    s = sub.add_parser("sweep", parents=[common], help="sweep one energy-model input")
    s.add_argument("--axis", required=True, choices=energy.SWEEP_AXES)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--num", type=int, default=11)
    s.add_argument("--log", action="store_true", help="geometric spacing")
    s = sub.add_parser("train", parents=[common, data], help="train the 64->10 network")
    s.add_argument("--mode", choices=[m.value for m in Mode])
    s.add_argument("--epochs", type=int)
    s.add_argument("--max-samples", type=int)
    s = sub.add_parser("eval", parents=[common, data], help="score a model on the test split")
    s.add_argument("--model", default="out/model.txt")
    s.add_argument("--workers", type=int, help="evaluation processes")
    s.add_argument("--untrained", action="store_true", help="score a freshly initialised network")
    s = sub.add_parser("weights-bitmap", parents=[common], help="8x8 weight maps as PGM and CSV")
    s.add_argument("--model", default="out/model.txt")
    sub.add_parser("show-config", parents=[common], help="print the effective configuration")
    return p


COMMANDS = {
    "hysteresis": cmd_hysteresis,
    "stdp-curve": cmd_stdp_curve,
    "bistability": cmd_bistability,
    "pairing-decay": cmd_pairing_decay,
    "energy-table": cmd_energy_table,
    "sweep": cmd_sweep,
    "train": cmd_train,
    "eval": cmd_eval,
    "weights-bitmap": cmd_weights_bitmap,
    "show-config": cmd_show_config,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CliError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
