"""Dataset ingestion, preprocessing, splits, and generators.

All loaders return raw values; `winsorize_and_scale` maps real-valued
features into [0, 1] using bounds fitted on the training split only.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError

KIND_REAL = "real"
KIND_BINARY = "binary"

MNIST_IMAGE_MAGIC = 2051
MNIST_LABEL_MAGIC = 2049


@dataclass(frozen=True, eq=False)
class DatasetSchema:
    """Feature names/kinds/costs plus the class labels of a dataset."""

    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    costs: np.ndarray
    class_names: tuple[str, ...]

    def __eq__(self, other):
        if not isinstance(other, DatasetSchema):
            return NotImplemented
        return self.to_json_dict() == other.to_json_dict()

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    def validate(self):
        d = len(self.feature_names)
        if len(self.feature_kinds) != d or len(self.costs) != d:
            raise SchemaError("feature names, kinds and costs must have equal length")
        if self.class_count < 2:
            raise SchemaError("at least two classes are required")
        for kind in self.feature_kinds:
            if kind not in (KIND_REAL, KIND_BINARY):
                raise SchemaError(f"unknown feature kind {kind!r}")
        if not np.all(np.asarray(self.costs) > 0):
            bad = int(np.argmin(self.costs))
            raise SchemaError(
                f"feature cost must be strictly positive, got {self.costs[bad]} "
                f"for {self.feature_names[bad]!r}"
            )

    def to_json_dict(self) -> dict:
        return {
            "features": [
                {"name": n, "kind": k, "cost": float(c)}
                for n, k, c in zip(self.feature_names, self.feature_kinds, self.costs)
            ],
            "classes": list(self.class_names),
        }

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")).encode()

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()


@dataclass
class TabularDataset:
    """Rows plus integer labels; `baseline` is set after preprocessing."""

    rows: np.ndarray
    labels: np.ndarray
    provenance: str = "raw"
    baseline: np.ndarray | None = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.rows.ndim != 2:
            raise DataError("rows must be a 2-d matrix")
        if len(self.labels) != len(self.rows):
            raise DataError("row/label count mismatch")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def subset(self, indices) -> "TabularDataset":
        return TabularDataset(
            rows=self.rows[indices],
            labels=self.labels[indices],
            provenance=self.provenance,
            baseline=self.baseline,
        )


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.15
    val_fraction_of_train: float = 0.15
    seed: int = 0

    def validate(self):
        for f in (self.test_fraction, self.val_fraction_of_train):
            if not 0.0 < f < 1.0:
                raise DataError(f"split fraction {f} outside (0, 1)")


@dataclass(frozen=True)
class FeatureBounds:
    """Per-feature clamp/scale interval fitted on the training split."""

    lower: np.ndarray
    upper: np.ndarray

    def to_json_dict(self) -> dict:
        return {"lower": [float(v) for v in self.lower], "upper": [float(v) for v in self.upper]}

    @staticmethod
    def from_json_dict(d: dict) -> "FeatureBounds":
        return FeatureBounds(
            lower=np.asarray(d["lower"], dtype=np.float64),
            upper=np.asarray(d["upper"], dtype=np.float64),
        )


def load_schema(schema_path) -> DatasetSchema:
    """Parse the schema JSON file: {features: [{name, kind, cost}], classes: [...]}."""
    path = Path(schema_path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read schema {path}: {exc}") from exc
    try:
        features = raw["features"]
        classes = raw["classes"]
        schema = DatasetSchema(
            feature_names=tuple(str(f["name"]) for f in features),
            feature_kinds=tuple(str(f["kind"]) for f in features),
            costs=np.asarray([float(f["cost"]) for f in features], dtype=np.float64),
            class_names=tuple(str(c) for c in classes),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed schema {path}: {exc}") from exc
    schema.validate()
    return schema


def load_tabular(data_path, schema_path) -> tuple[TabularDataset, DatasetSchema]:
    """Load a CSV whose header is the schema's feature names plus `label`.

    No preprocessing is applied; values are returned as parsed.
    """
    schema = load_schema(schema_path)
    path = Path(data_path)
    expected_header = list(schema.feature_names) + ["label"]
    rows: list[list[float]] = []
    labels: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: no data rows (file is empty)") from None
        if header != expected_header:
            raise DataError(
                f"{path}: header mismatch; expected {expected_header[:4]}...+label, "
                f"got {header[:4]}..."
            )
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(expected_header):
                raise DataError(f"{path}:{lineno}: expected {len(expected_header)} cells, got {len(record)}")
            try:
                values = [float(cell) for cell in record[:-1]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
            try:
                label = int(record[-1])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-integer label {record[-1]!r}") from exc
            if not 0 <= label < schema.class_count:
                raise DataError(
                    f"{path}:{lineno}: label {label} outside [0, {schema.class_count})"
                )
            rows.append(values)
            labels.append(label)
    if not rows:
        raise DataError(f"{path}: no data rows")
    ds = TabularDataset(rows=np.asarray(rows), labels=np.asarray(labels), provenance="raw")
    return ds, schema


def write_tabular(ds: TabularDataset, schema: DatasetSchema, data_path, schema_path=None):
    """Write a dataset back to CSV (and optionally its schema JSON)."""
    path = Path(data_path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(schema.feature_names) + ["label"])
        for row, label in zip(ds.rows, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    if schema_path is not None:
        write_schema(schema, schema_path)


def write_schema(schema: DatasetSchema, schema_path):
    Path(schema_path).write_text(
        json.dumps(schema.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def fit_feature_bounds(
    train_rows: np.ndarray, schema: DatasetSchema, lower_pct: float = 5, upper_pct: float = 95
) -> FeatureBounds:
    """Percentile clamp bounds per real feature; binaries get the identity [0, 1]."""
    d = train_rows.shape[1]
    lower = np.zeros(d)
    upper = np.ones(d)
    for j, kind in enumerate(schema.feature_kinds):
        if kind == KIND_BINARY:
            continue
        col = train_rows[:, j]
        lower[j] = np.percentile(col, lower_pct)  # linear interpolation
        upper[j] = np.percentile(col, upper_pct)
    return FeatureBounds(lower=lower, upper=upper)


def apply_feature_bounds(
    rows: np.ndarray, schema: DatasetSchema, bounds: FeatureBounds
) -> np.ndarray:
    out = np.array(rows, dtype=np.float64, copy=True)
    for j, kind in enumerate(schema.feature_kinds):
        if kind == KIND_BINARY:
            continue
        lo, hi = bounds.lower[j], bounds.upper[j]
        col = np.clip(out[:, j], lo, hi)
        span = hi - lo
        if span > 0:
            out[:, j] = (col - lo) / span
        else:
            out[:, j] = 0.0  # constant feature maps to 0
    return out


def winsorize_and_scale(
    ds: TabularDataset,
    schema: DatasetSchema,
    bounds: FeatureBounds | None = None,
    lower_pct: float = 5,
    upper_pct: float = 95,
) -> tuple[TabularDataset, FeatureBounds]:
    """Clamp real features to the percentile interval and min-max scale to [0, 1].

    When `bounds` is omitted they are fitted on `ds` itself (the training
    split); pass the fitted bounds to transform validation/test splits.
    An already-preprocessed dataset passes through unchanged, so applying
    the operation twice equals applying it once.
    """
    d = ds.n_features
    if ds.provenance == "winsorized+scaled":
        return ds, bounds if bounds is not None else FeatureBounds(np.zeros(d), np.ones(d))
    if bounds is None:
        bounds = fit_feature_bounds(ds.rows, schema, lower_pct, upper_pct)
    scaled = apply_feature_bounds(ds.rows, schema, bounds)
    out = TabularDataset(
        rows=scaled, labels=ds.labels, provenance="winsorized+scaled", baseline=None
    )
    return out, bounds


def compute_baseline(train_rows: np.ndarray) -> np.ndarray:
    """Per-feature mean of the (preprocessed) training rows."""
    return train_rows.mean(axis=0)


def _stratified_take(labels: np.ndarray, fraction: float, rng: np.random.Generator):
    """Pick round(n_c * fraction) indices per class; returns (taken, rest)."""
    taken: list[np.ndarray] = []
    rest: list[np.ndarray] = []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = rng.permutation(idx)
        n_take = int(round(len(idx) * fraction))
        taken.append(idx[:n_take])
        rest.append(idx[n_take:])
    return np.sort(np.concatenate(taken)), np.sort(np.concatenate(rest))


def split(
    ds: TabularDataset, spec: SplitSpec
) -> tuple[TabularDataset, TabularDataset, TabularDataset]:
    """Stratified train/val/test split, deterministic per seed."""
    spec.validate()
    if ds.n_rows < 20:
        raise DataError(f"need at least 20 rows to split, got {ds.n_rows}")
    classes, counts = np.unique(ds.labels, return_counts=True)
    for cls, cnt in zip(classes, counts):
        if cnt < 3:
            raise DataError(f"class {cls} has only {cnt} samples; need at least 3")
    seeds = np.random.SeedSequence(spec.seed).spawn(2)
    test_idx, trainval_idx = _stratified_take(
        ds.labels, spec.test_fraction, np.random.Generator(np.random.PCG64(seeds[0]))
    )
    sub_labels = ds.labels[trainval_idx]
    val_rel, train_rel = _stratified_take(
        sub_labels, spec.val_fraction_of_train, np.random.Generator(np.random.PCG64(seeds[1]))
    )
    val_idx = trainval_idx[val_rel]
    train_idx = trainval_idx[train_rel]
    return ds.subset(train_idx), ds.subset(val_idx), ds.subset(test_idx)


def generate_synthesized(
    n: int = 16000, d: int = 64, seed: int = 0
) -> tuple[TabularDataset, DatasetSchema]:
    """Two-class dataset where only the first d/2 dimensions carry signal.

    Informative dims are unit-variance Gaussians centred at +-0.5 depending
    on the class; the remaining dims are class-independent standard
    Gaussians. Costs rise linearly 1..d/2 within each half.
    """
    if d % 2 != 0:
        raise DataError("dimension must be even (half informative, half noise)")
    half = d // 2
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = rng.integers(0, 2, size=n)
    centers = np.where(labels == 1, 0.5, -0.5)[:, None]
    informative = rng.standard_normal((n, half)) + centers
    noise = rng.standard_normal((n, half))
    rows = np.concatenate([informative, noise], axis=1)
    costs = np.concatenate([np.arange(1, half + 1), np.arange(1, half + 1)]).astype(np.float64)
    schema = DatasetSchema(
        feature_names=tuple(f"dim_{i:02d}" for i in range(d)),
        feature_kinds=tuple(KIND_REAL for _ in range(d)),
        costs=costs,
        class_names=("class_0", "class_1"),
    )
    schema.validate()
    return TabularDataset(rows=rows, labels=labels, provenance="raw"), schema


def _read_be32(fh, path, what):
    data = fh.read(4)
    if len(data) != 4:
        raise DataError(f"{path}: truncated file while reading {what}")
    return struct.unpack(">i", data)[0]


def load_mnist(images_path, labels_path) -> tuple[TabularDataset, DatasetSchema]:
    """Read an IDX image/label pair into a flat tabular dataset.

    Pixels are scaled by 1/255; every pixel has acquisition cost 1.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    with open(images_path, "rb") as fh:
        magic = _read_be32(fh, images_path, "magic")
        if magic != MNIST_IMAGE_MAGIC:
            raise DataError(f"{images_path}: bad magic {magic}, expected {MNIST_IMAGE_MAGIC}")
        count = _read_be32(fh, images_path, "count")
        n_rows = _read_be32(fh, images_path, "rows")
        n_cols = _read_be32(fh, images_path, "cols")
        payload = fh.read(count * n_rows * n_cols)
        if len(payload) != count * n_rows * n_cols:
            raise DataError(f"{images_path}: truncated pixel payload")
        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, n_rows * n_cols)
    with open(labels_path, "rb") as fh:
        magic = _read_be32(fh, labels_path, "magic")
        if magic != MNIST_LABEL_MAGIC:
            raise DataError(f"{labels_path}: bad magic {magic}, expected {MNIST_LABEL_MAGIC}")
        label_count = _read_be32(fh, labels_path, "count")
        payload = fh.read(label_count)
        if len(payload) != label_count:
            raise DataError(f"{labels_path}: truncated label payload")
        labels = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    if label_count != count:
        raise DataError(f"image/label count mismatch: {count} images vs {label_count} labels")
    if labels.size and labels.max() > 9:
        raise DataError(f"{labels_path}: label {labels.max()} outside 0..9")
    rows = pixels.astype(np.float64) / 255.0
    d = n_rows * n_cols
    schema = DatasetSchema(
        feature_names=tuple(f"px_{i // n_cols:02d}_{i % n_cols:02d}" for i in range(d)),
        feature_kinds=tuple(KIND_REAL for _ in range(d)),
        costs=np.ones(d),
        class_names=tuple(str(i) for i in range(10)),
    )
    ds = TabularDataset(rows=rows, labels=labels, provenance="winsorized+scaled")
    return ds, schema


def write_idx_images(path, images: np.ndarray):
    """Write uint8 images (n, rows, cols) in IDX format."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", MNIST_IMAGE_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    """Write uint8 labels (n,) in IDX format."""
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", MNIST_LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())
