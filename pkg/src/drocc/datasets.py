"""Synthetic manifold generators, CSV ingestion, normalization, splits.

Labels are +1 (normal) / -1 (anomalous). Split tags are small ints;
normalization statistics are fitted on the train split only and applied
unchanged everywhere else.
"""

import csv
import gzip
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, CsvFormatError

TRAIN, VAL, TEST = 0, 1, 2
SPLIT_NAMES = {TRAIN: "train", VAL: "val", TEST: "test"}

SINE_T_RANGE = (0.0, 4.0 * np.pi)


@dataclass
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int8 in {+1, -1}
    split: np.ndarray  # (n,) uint8 in {TRAIN, VAL, TEST}
    norm_mean: np.ndarray | None = None
    norm_std: np.ndarray | None = None
    contamination: float | None = None

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ContractError("features must be 2-D")
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ContractError("labels length must match feature rows")
        if self.split.shape != (n,):
            raise ContractError("split tags length must match feature rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def rows(self, split_tag: int) -> np.ndarray:
        return self.features[self.split == split_tag]

    def labels_of(self, split_tag: int) -> np.ndarray:
        return self.labels[self.split == split_tag]


def _make(features: np.ndarray, label: int) -> Dataset:
    n = features.shape[0]
    return Dataset(
        features=np.ascontiguousarray(features, dtype=np.float64),
        labels=np.full(n, label, dtype=np.int8),
        split=np.zeros(n, dtype=np.uint8),
    )


def _balanced_signs(n: int) -> np.ndarray:
    signs = np.ones(n)
    signs[1::2] = -1.0
    return signs


def gen_sine2d(n: int = 1000, seed: int = 0, t_range=SINE_T_RANGE) -> Dataset:
    """Points (t, sin t) with t uniform over t_range; labels +1."""
    if n < 1:
        raise ContractError("n must be >= 1")
    rng = np.random.default_rng(seed)
    t = rng.uniform(t_range[0], t_range[1], n)
    return _make(np.column_stack([t, np.sin(t)]), +1)


def gen_sine_displaced(n: int, displacement: float, seed: int = 0, t_range=SINE_T_RANGE) -> Dataset:
    """Points (t, sin t +/- displacement), signs balanced; labels -1."""
    if displacement < 0:
        raise ContractError("displacement must be >= 0")
    rng = np.random.default_rng(seed)
    t = rng.uniform(t_range[0], t_range[1], n)
    y = np.sin(t) + displacement * _balanced_signs(n)
    return _make(np.column_stack([t, y]), -1)


def gen_noisy_sine10d(n: int = 1024, seed: int = 0) -> Dataset:
    """First two coordinates on the sine curve, eight pure-noise Gaussian
    coordinates; labels +1."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(SINE_T_RANGE[0], SINE_T_RANGE[1], n)
    noise = rng.standard_normal((n, 8))
    return _make(np.column_stack([t, np.sin(t), noise]), +1)


def gen_noisy_sine10d_displaced(n: int, displacement: float, seed: int = 0) -> Dataset:
    """Negatives for the 10-D set: vertical displacement on coordinate 2
    only, fresh noise elsewhere; labels -1."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(SINE_T_RANGE[0], SINE_T_RANGE[1], n)
    y = np.sin(t) + displacement * _balanced_signs(n)
    noise = rng.standard_normal((n, 8))
    return _make(np.column_stack([t, y, noise]), -1)


def _unit_directions(n: int, d: int, rng) -> np.ndarray:
    U = rng.standard_normal((n, d))
    return U / np.sqrt((U * U).sum(axis=1))[:, None]


def gen_ball(n: int, d: int = 3, seed: int = 0) -> Dataset:
    """Uniform points in the unit ball; labels +1."""
    if d < 1:
        raise ContractError("d must be >= 1")
    rng = np.random.default_rng(seed)
    dirs = _unit_directions(n, d, rng)
    radii = rng.random(n) ** (1.0 / d)
    return _make(dirs * radii[:, None], +1)


def gen_sphere_surface(n: int, d: int = 3, rho: float = 1.2, seed: int = 0) -> Dataset:
    """Uniform points on the sphere of radius rho; labels -1."""
    if rho <= 0:
        raise ContractError("rho must be > 0")
    rng = np.random.default_rng(seed)
    return _make(_unit_directions(n, d, rng) * rho, -1)


def concat(a: Dataset, b: Dataset) -> Dataset:
    if a.dim != b.dim:
        raise ContractError("datasets have different dims")
    return Dataset(
        features=np.vstack([a.features, b.features]),
        labels=np.concatenate([a.labels, b.labels]),
        split=np.concatenate([a.split, b.split]),
        norm_mean=a.norm_mean,
        norm_std=a.norm_std,
        contamination=a.contamination,
    )


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def load_csv(path, label_column: str, positive_label_value: str = "1") -> Dataset:
    """Read a UTF-8 CSV with a header row into a Dataset.

    All columns except label_column must be numeric. Rows whose label cell
    equals positive_label_value (string or numeric comparison) map to +1,
    everything else to -1. Files ending in .gz are transparently
    decompressed. Row order is preserved.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise CsvFormatError(f"missing label column {label_column!r}")
        label_idx = header.index(label_column)

        rows = []
        labels = []
        try:
            pos_num = float(positive_label_value)
        except ValueError:
            pos_num = None
        for rownum, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise CsvFormatError(
                    f"expected {len(header)} cells, got {len(record)}", row=rownum
                )
            vals = []
            for i, cell in enumerate(record):
                if i == label_idx:
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"non-numeric cell {cell!r}", row=rownum, column=header[i]
                    ) from None
            raw = record[label_idx].strip()
            if pos_num is not None:
                try:
                    is_pos = float(raw) == pos_num
                except ValueError:
                    is_pos = raw == positive_label_value
            else:
                is_pos = raw == positive_label_value
            labels.append(1 if is_pos else -1)
            rows.append(vals)

    if not rows:
        raise CsvFormatError("no data rows (header only)")
    features = np.array(rows, dtype=np.float64)
    ds = _make(features, +1)
    ds.labels = np.array(labels, dtype=np.int8)
    return ds


# ---------------------------------------------------------------------------
# normalization and splits
# ---------------------------------------------------------------------------

def split(dataset: Dataset, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> Dataset:
    """Random permutation partition into train/val/test with exact counts
    (largest-remainder rounding)."""
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ContractError("ratios must be three values summing to 1")
    n = dataset.n
    raw = np.array([r * n for r in ratios])
    counts = np.floor(raw).astype(int)
    rem = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    for i in range(rem):
        counts[order[i]] += 1
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    tags = np.empty(n, dtype=np.uint8)
    tags[perm[: counts[0]]] = TRAIN
    tags[perm[counts[0] : counts[0] + counts[1]]] = VAL
    tags[perm[counts[0] + counts[1] :]] = TEST
    return replace(dataset, split=tags)


def normalize(dataset: Dataset) -> Dataset:
    """Zero-mean/unit-variance per feature, statistics from the train split.

    Constant features keep std 1 so they pass through centered.
    """
    train = dataset.rows(TRAIN)
    if train.shape[0] == 0:
        raise ContractError("train split is empty; cannot fit normalization")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return replace(
        dataset,
        features=(dataset.features - mean) / std,
        norm_mean=mean,
        norm_std=std,
    )


def apply_normalization(features: np.ndarray, dataset: Dataset) -> np.ndarray:
    """Apply a dataset's stored statistics to external rows (e.g. fresh
    negatives evaluated against a normalized train set)."""
    if dataset.norm_mean is None:
        return features
    return (features - dataset.norm_mean) / dataset.norm_std
