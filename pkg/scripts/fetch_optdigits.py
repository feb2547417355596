"""Materialize optdigits.tra / optdigits.tes without direct access to the UCI archive.

The UCI files are normally fetched from
https://archive.ics.uci.edu/ml/machine-learning-databases/optdigits/ .
When that host is unreachable, the ``keel-ds`` wheel (available from any PyPI
mirror) carries the same 5620 rows as ``optdigits.dat``: the 3823 training
rows followed by the 1797 test rows, in the original order. The test block
is cross-checked against the copy bundled with scikit-learn when available.

    python scripts/fetch_optdigits.py --out data/
"""

import argparse
import glob
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/optdigits/"
N_TRAIN, N_TEST = 3823, 1797


def from_uci(out: Path) -> bool:
    try:
        for name in ("optdigits.tra", "optdigits.tes"):
            with urllib.request.urlopen(UCI + name, timeout=10) as r:
                (out / name).write_bytes(r.read())
        return True
    except OSError:
        return False


def from_keel(out: Path) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "keel-ds==0.2.5"],
            check=True,
        )
        wheel = glob.glob(f"{tmp}/keel_ds-*.whl")[0]
        raw = zipfile.ZipFile(wheel).read("keel_ds/data/balanced/raw/optdigits.dat").decode()
    rows = [line.strip() for line in raw.splitlines() if line.strip() and not line.startswith("@")]
    if len(rows) != N_TRAIN + N_TEST:
        raise SystemExit(f"unexpected row count {len(rows)}")
    try:
        from sklearn.datasets import load_digits

        d = load_digits()
        bundled = [",".join(map(str, [*map(int, x), int(y)])) for x, y in zip(d.data, d.target)]
        if bundled != rows[N_TRAIN:]:
            raise SystemExit("test block does not match scikit-learn's copy of optdigits.tes")
    except ImportError:
        pass
    (out / "optdigits.tra").write_text("\n".join(rows[:N_TRAIN]) + "\n")
    (out / "optdigits.tes").write_text("\n".join(rows[N_TRAIN:]) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    if not from_uci(args.out):
        print("UCI archive unreachable, extracting from keel-ds", file=sys.stderr)
        from_keel(args.out)
    for name in ("optdigits.tra", "optdigits.tes"):
        n = sum(1 for _ in open(args.out / name))
        print(f"{args.out / name}: {n} rows")


if __name__ == "__main__":
    main()
