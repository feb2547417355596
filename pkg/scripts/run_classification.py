"""Train and score the three classification setups and write a summary CSV.

    python scripts/run_classification.py --out out/classification
    python scripts/run_classification.py --only bistable --seed 3

Each run is also written as model.txt / history.csv / confusion.csv under
``<out>/<name>/`` so it can be inspected with ``neusoc eval`` or
``neusoc weights-bitmap``.
"""

import argparse
import csv
import time
from pathlib import Path

import numpy as np

from neusoc.config import load_config, save_model
from neusoc.data import find_optdigits, load_optdigits
from neusoc.experiments import run_classification

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RUNS = {
    # name: (config file, accuracy target)
    "analog": ("analog.ini", 0.75),
    "analog_4digits": ("analog_4digits.ini", 0.90),
    "bistable": ("bistable.ini", 0.65),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/classification")
    ap.add_argument("--data-dir")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--only", choices=sorted(RUNS), action="append")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    train, test = (load_optdigits(p) for p in find_optdigits(args.data_dir))
    out = Path(args.out)
    summary = []
    for name in args.only or RUNS:
        fname, target = RUNS[name]
        cfg = load_config(CONFIGS / fname)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        t0 = time.perf_counter()
        run = run_classification(cfg.network, train, test, cfg.experiment.digits, cfg.experiment.epochs,
                                 args.workers)
        dt = time.perf_counter() - t0
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        save_model(d / "model.txt", cfg, run.net)
        run.history.to_csv(d / "history.csv")
        np.savetxt(d / "confusion.csv", run.evaluation.confusion, fmt="%d", delimiter=",")
        levels = len(run.distinct_weights)
        print(f"{name:15s} accuracy {run.accuracy:.4f} (target {target})  "
              f"{run.net.samples_seen} train / {len(run.evaluation.predictions)} test  "
              f"{levels} weight levels  {dt:.1f} s")
        summary.append([name, cfg.network.seed, run.net.samples_seen, len(run.evaluation.predictions),
                        f"{run.accuracy:.6f}", target, run.accuracy >= target, levels, f"{dt:.1f}"])

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "seed", "n_train", "n_test", "accuracy", "target", "met", "weight_levels", "seconds"])
        w.writerows(summary)


if __name__ == "__main__":
    main()
