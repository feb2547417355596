"""Loader for the UCI optical-recognition handwritten digits (optdigits).

Each line holds 65 comma-separated integers: 64 pixel counts (0..16, an 8x8
bitmap in row-major order) followed by the class label (0..9). The official
split is ``optdigits.tra`` (3823 rows) and ``optdigits.tes`` (1797 rows);
``scripts/fetch_optdigits.py`` materializes both.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_PIXELS = 64
MAX_PIXEL = 16
DEFAULT_SUBSET = (0, 1, 2, 3)
DOWNLOAD_HINT = (
    "optdigits files not found; run `python scripts/fetch_optdigits.py --out data/` "
    "or download optdigits.tra / optdigits.tes from the UCI repository"
)


class Split(enum.Enum):
    TRAIN = "train"
    TEST = "test"


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    pixels: np.ndarray  # (n, 64) int
    labels: np.ndarray  # (n,) int
    split: Split = Split.TRAIN

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.shape[1] != N_PIXELS:
            raise DatasetError(f"pixels must have shape (n, {N_PIXELS}), got {self.pixels.shape}")
        if len(self.pixels) != len(self.labels):
            raise DatasetError("pixels and labels differ in length")
        if len(self.labels) == 0:
            raise DatasetError("dataset is empty")
        if self.pixels.min() < 0 or self.pixels.max() > MAX_PIXEL:
            raise DatasetError("pixel out of range 0..16")
        if self.labels.min() < 0 or self.labels.max() > 9:
            raise DatasetError("label out of range 0..9")

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return zip(self.pixels, self.labels)

    def head(self, n: int) -> Dataset:
        return Dataset(self.pixels[:n], self.labels[:n], self.split)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=10)

    def to_csv(self) -> str:
        rows = np.column_stack([self.pixels, self.labels])
        return "".join(",".join(map(str, r)) + "\n" for r in rows)


def load_optdigits(path, split: Split | None = None) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: {DOWNLOAD_HINT}")
    if split is None:
        split = Split.TEST if path.suffix == ".tes" else Split.TRAIN
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != N_PIXELS + 1:
                raise DatasetError(f"{path}:{lineno}: expected {N_PIXELS + 1} fields, got {len(fields)}")
            try:
                values = [int(f) for f in fields]
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-integer field") from None
            if not all(0 <= v <= MAX_PIXEL for v in values[:N_PIXELS]):
                raise DatasetError(f"{path}:{lineno}: pixel out of range 0..{MAX_PIXEL}")
            if not 0 <= values[-1] <= 9:
                raise DatasetError(f"{path}:{lineno}: label {values[-1]} out of range 0..9")
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: empty file")
    arr = np.array(rows, dtype=np.int64)
    return Dataset(arr[:, :N_PIXELS], arr[:, N_PIXELS], split)


def subset_digits(ds: Dataset, digits) -> Dataset:
    digits = sorted(set(digits))
    if not digits or not all(0 <= d <= 9 for d in digits):
        raise DatasetError("digit set must be a non-empty subset of 0..9")
    keep = np.isin(ds.labels, digits)
    if not keep.any():
        raise DatasetError(f"no samples with labels {digits}")
    return Dataset(ds.pixels[keep], ds.labels[keep], ds.split)


def find_optdigits(data_dir=None) -> tuple[Path, Path]:
    """Locate ``optdigits.tra``/``.tes`` in ``data_dir``, ``$NEUSOC_DATA_DIR`` or ``./data``.

    An explicit ``data_dir`` is the only place looked at.
    """
    if data_dir:
        candidates = [Path(data_dir)]
    else:
        candidates = [Path(p) for p in (os.environ.get("NEUSOC_DATA_DIR"),) if p]
        candidates += [Path.cwd() / "data", Path(__file__).resolve().parents[2] / "data"]
    for d in candidates:
        tra, tes = d / "optdigits.tra", d / "optdigits.tes"
        if tra.exists() and tes.exists():
            return tra, tes
    raise FileNotFoundError(DOWNLOAD_HINT)
