"""Datasets, centers, radii and radial transforms.

A radial deformation rescales every axis about a fixed center,
``x_i -> c_i + f_i * (x_i - c_i)``. Compression and input expansion are the
isotropic special cases. Feature indices are 0-based here; the CLI converts
the 1-based inclusive ranges used in reports (``"9:12"``).

Randomness comes from ``numpy.random.Generator(PCG64(seed))`` and Gaussian
draws use its ``standard_normal`` (ziggurat) method, so datasets are
reproducible bit for bit across platforms for a given numpy major version.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._backend import kernels

#: Step between anomaly means on consecutive revealing axes (see generate_artificial).
DEFAULT_MEAN_STEP = 0.16


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator used everywhere in the package."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, binary labels (1 = anomaly) and feature names.

    The arrays are copied and marked read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, copy=True)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"features must be a non-empty 2-D matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain NaN or Inf")
        y = np.array(self.labels, copy=True)
        if y.shape != (x.shape[0],):
            raise ValueError(f"labels length {y.shape} does not match {x.shape[0]} rows")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        y = y.astype(np.int8)
        names = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise ValueError(f"{len(names)} feature names for {x.shape[1]} features")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_anomalies(self) -> int:
        return int(self.labels.sum())

    def has_both_classes(self) -> bool:
        k = self.n_anomalies
        return 0 < k < self.n_rows

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.feature_names)

    def select_rows(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)

    def select_features(self, cols) -> "Dataset":
        cols = np.arange(self.n_features)[cols]
        return Dataset(self.features[:, cols], self.labels, [self.feature_names[c] for c in cols])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _features(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.features
    x = np.asarray(data, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


def _check_center(x: np.ndarray, center) -> np.ndarray:
    c = np.asarray(center, dtype=np.float64)
    if c.shape != (x.shape[1],):
        raise ValueError(f"center has shape {c.shape}, data has {x.shape[1]} features")
    return c


def check_factors(factors, dim: int | None = None) -> np.ndarray:
    f = np.asarray(factors, dtype=np.float64)
    if f.ndim != 1 or (dim is not None and f.shape[0] != dim):
        raise ValueError(f"factor vector has shape {f.shape}, expected ({dim},)")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("deformation factors must be finite and strictly positive")
    return f


def generate_artificial(
    n_points: int = 100_000,
    anomaly_ratio: float = 0.01,
    seed: int = 0,
    *,
    mean_step: float = DEFAULT_MEAN_STEP,
    anomaly_scale: float = 0.4,
    n_features: int = 15,
    n_revealing: int = 12,
) -> Dataset:
    """Gaussian dataset with planted anomalies.

    All ``n_features`` axes are drawn from N(0, 1). The first
    ``floor(anomaly_ratio * n_points)`` rows are then redrawn on the first
    ``n_revealing`` axes from N(i * mean_step, anomaly_scale), i = 0..11, and
    labeled 1.

    With the default ``mean_step=0.16`` the radial AUROC on features 9:12 is
    about 0.939 and the positivity AUROC on 7:12 about 0.986. A step of
    ``1/16`` puts the anomalies *inside* the normal cloud; pass it explicitly
    to get that variant.
    """
    if n_points < 100:
        raise ValueError(f"n_points must be at least 100, got {n_points}")
    if not 0.0 < anomaly_ratio < 1.0:
        raise ValueError(f"anomaly_ratio must lie in (0, 1), got {anomaly_ratio}")
    if not 1 <= n_revealing <= n_features:
        raise ValueError("need 1 <= n_revealing <= n_features")
    n_anom = int(math.floor(anomaly_ratio * n_points))
    if n_anom < 1:
        raise ValueError(f"anomaly_ratio {anomaly_ratio} yields no anomalies at n_points={n_points}")
    rng = make_rng(seed)
    x = rng.standard_normal((n_points, n_features))
    means = mean_step * np.arange(n_revealing)
    x[:n_anom, :n_revealing] = means + anomaly_scale * rng.standard_normal((n_anom, n_revealing))
    y = np.zeros(n_points, dtype=np.int8)
    y[:n_anom] = 1
    return Dataset(x, y)


def center_of_mass(data: Dataset, class_filter: int | None = None) -> np.ndarray:
    x = data.features
    if class_filter is not None:
        x = x[data.labels == class_filter]
    if x.shape[0] == 0:
        raise ValueError(f"no rows match class filter {class_filter}")
    return x.mean(axis=0)


def radii(data, center) -> np.ndarray:
    """Euclidean distance of every row from ``center``."""
    x = _features(data)
    c = _check_center(x, center)
    return np.sqrt(((x - c) ** 2).sum(axis=1))


def deform_array(x: np.ndarray, center, factors) -> np.ndarray:
    """Map every row to ``center + factors * (row - center)``.

    Axes with factor exactly 1 are copied untouched, so identity factors
    return a bitwise copy.
    """
    x = np.asarray(x, dtype=np.float64)
    c = _check_center(x, center)
    f = check_factors(factors, x.shape[1])
    out = x.copy()
    moved = f != 1.0
    out[:, moved] = c[moved] + f[moved] * (x[:, moved] - c[moved])
    return out


def radial_deform(data: Dataset, center, factors) -> Dataset:
    return data.with_features(deform_array(data.features, center, factors))


def compress(data: Dataset, center, c: float) -> Dataset:
    """Isotropic compression toward ``center`` by a scalar in (0, 1)."""
    if np.ndim(c) != 0:
        raise ValueError("compression factor must be a scalar")
    if not 0.0 < c < 1.0:
        raise ValueError(f"compression factor must lie in (0, 1), got {c}")
    return radial_deform(data, center, np.full(data.n_features, float(c)))


def expand_inputs(data: Dataset, center, e: float) -> Dataset:
    if np.ndim(e) != 0:
        raise ValueError("expansion factor must be a scalar")
    if not e > 1.0:
        raise ValueError(f"expansion factor must exceed 1, got {e}")
    return radial_deform(data, center, np.full(data.n_features, float(e)))


def relative_distance(prediction, training, center) -> float:
    """Ratio of mean radii of the prediction set over the training set."""
    return float(radii(prediction, center).mean() / radii(training, center).mean())


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded split; training gets only normal rows, test gets every anomaly."""
    if not data.has_both_classes():
        raise ValueError("split needs both classes present")
    normal = np.flatnonzero(data.labels == 0)
    anomalous = np.flatnonzero(data.labels == 1)
    n_train = int(round(spec.train_fraction * normal.size))
    if n_train < 1 or n_train >= normal.size:
        raise ValueError(
            f"train_fraction {spec.train_fraction} leaves an empty partition "
            f"({normal.size} normal rows)"
        )
    perm = make_rng(spec.seed).permutation(normal)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(np.concatenate([perm[n_train:], anomalous]))
    return data.select_rows(train_idx), data.select_rows(test_idx)


def feature_auroc_ranking(data: Dataset) -> list[tuple[int, float]]:
    """Per-feature AUROC of ``|x_i - mean_i(normal rows)|``, best first."""
    if not data.has_both_classes():
        raise ValueError("feature ranking needs both classes present")
    mu = center_of_mass(data, 0)
    dev = np.abs(data.features - mu)
    scores = [(i, float(kernels.auroc(dev[:, i], data.labels))) for i in range(data.n_features)]
    return sorted(scores, key=lambda t: (-t[1], t[0]))


def positivity_score(data: Dataset, features: slice) -> np.ndarray:
    """1 where every feature in ``features`` is strictly positive, else 0."""
    sub = data.features[:, features]
    if sub.shape[1] == 0:
        raise ValueError(f"empty feature interval {features}")
    return np.all(sub > 0, axis=1).astype(np.float64)


def parse_feature_range(text: str, n_features: int | None = None) -> slice:
    """Convert a 1-based inclusive range such as ``"9:12"`` (or ``"5"``) to a slice."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise ValueError(f"malformed feature range {text!r}") from None
    if lo < 1 or hi < lo or (n_features is not None and hi > n_features):
        raise ValueError(f"feature range {text!r} out of bounds")
    return slice(lo - 1, hi)


def load_csv(
    path,
    label_column: str = "label",
    feature_columns: Sequence[str] | None = None,
    standardize: bool = False,
) -> Dataset:
    """Read a dataset from CSV (header row, numeric features, 0/1 label column).

    With ``standardize`` every feature is z-scored over all rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not found")
        if feature_columns is None:
            feature_columns = [h for h in header if h != label_column]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise ValueError(f"{path}: missing feature columns {missing}")
        li = header.index(label_column)
        fi = [header.index(c) for c in feature_columns]
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not s.strip() for s in rec):
                continue
            if len(rec) != len(header):
                raise ValueError(f"{path}: row {lineno} has {len(rec)} cells, expected {len(header)}")
            lab = rec[li].strip()
            if lab not in ("0", "1", "0.0", "1.0"):
                raise ValueError(f"{path}: row {lineno} has non-binary label {lab!r}")
            try:
                vals = [float(rec[j]) for j in fi]
            except ValueError:
                raise ValueError(f"{path}: row {lineno} has a non-numeric feature cell") from None
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{path}: row {lineno} has a non-finite feature value")
            rows.append(vals)
            labels.append(int(float(lab)))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    x = np.array(rows, dtype=np.float64)
    if standardize:
        sd = x.std(axis=0)
        x = (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    return Dataset(x, np.array(labels, dtype=np.int8), feature_columns)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def save_csv(data: Dataset, path, label_column: str = "label") -> None:
    lines = [",".join([*data.feature_names, label_column])]
    for row, lab in zip(data.features.tolist(), data.labels.tolist()):
        lines.append(",".join([*map(repr, row), str(lab)]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def save_factors(path, center, factors) -> None:
    doc = {"center": np.asarray(center, dtype=float).tolist(),
           "factors": check_factors(factors).tolist()}
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_factors(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    center = np.asarray(doc["center"], dtype=np.float64)
    factors = check_factors(doc["factors"], center.shape[0])
    return center, factors
