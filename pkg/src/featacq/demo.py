"""Deterministic demo datasets.

The benchmark and service need data shaped like the public clinical and
image sets this package is meant for, but the repo ships no third-party
data. These generators produce drop-in replacements: a 21-feature
thyroid-screening panel (three imbalanced classes, lab tests expensive,
questionnaire flags cheap) and a 28x28 handwritten-digit set written as
IDX files (built by augmenting the 8x8 digits bundled with scikit-learn).
Real files with the same layout can be used instead at any time.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .data import (
    KIND_BINARY,
    KIND_REAL,
    DatasetSchema,
    TabularDataset,
    write_idx_images,
    write_idx_labels,
    write_tabular,
)

# Column layout mirrors the classic thyroid screening panel: age, 15
# yes/no history or questionnaire items, then five laboratory tests.
# Lab costs are relative acquisition burdens in the published 1.00-22.78
# range; every questionnaire item costs 1.00.
THYROID_FEATURES = [
    ("age", KIND_REAL, 1.00),
    ("sex", KIND_BINARY, 1.00),
    ("on_thyroxine", KIND_BINARY, 1.00),
    ("query_on_thyroxine", KIND_BINARY, 1.00),
    ("on_antithyroid_meds", KIND_BINARY, 1.00),
    ("sick", KIND_BINARY, 1.00),
    ("pregnant", KIND_BINARY, 1.00),
    ("thyroid_surgery", KIND_BINARY, 1.00),
    ("i131_treatment", KIND_BINARY, 1.00),
    ("query_hypothyroid", KIND_BINARY, 1.00),
    ("query_hyperthyroid", KIND_BINARY, 1.00),
    ("lithium", KIND_BINARY, 1.00),
    ("goitre", KIND_BINARY, 1.00),
    ("tumor", KIND_BINARY, 1.00),
    ("hypopituitary", KIND_BINARY, 1.00),
    ("psych", KIND_BINARY, 1.00),
    ("tsh", KIND_REAL, 22.78),
    ("t3", KIND_REAL, 11.41),
    ("tt4", KIND_REAL, 14.51),
    ("t4u", KIND_REAL, 16.11),
    ("fti", KIND_REAL, 8.47),
]

THYROID_CLASSES = ("hyperthyroid", "hypothyroid", "normal")
_THYROID_PRIORS = np.array([0.025, 0.051, 0.924])

HYPER, HYPO, NORMAL = 0, 1, 2


def thyroid_schema() -> DatasetSchema:
    return DatasetSchema(
        feature_names=tuple(name for name, _, _ in THYROID_FEATURES),
        feature_kinds=tuple(kind for _, kind, _ in THYROID_FEATURES),
        costs=np.asarray([cost for _, _, cost in THYROID_FEATURES], dtype=np.float64),
        class_names=THYROID_CLASSES,
    )


def _bernoulli_by_class(rng, labels, p_hyper, p_hypo, p_normal):
    p = np.choose(labels, [p_hyper, p_hypo, p_normal])
    return (rng.random(len(labels)) < p).astype(np.float64)


def generate_thyroid_like(n: int = 7200, seed: int = 0) -> tuple[TabularDataset, DatasetSchema]:
    """Synthetic screening panel with the class imbalance and cost profile
    of the public 7200-sample thyroid set.

    The free-thyroxine index separates the two dysfunction classes almost
    on its own; the targeted questionnaire flags and demographics carry
    cheap but real signal; the remaining labs track the same latent state
    and add little once the index is known.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = rng.choice(3, size=n, p=_THYROID_PRIORS)
    hyper, hypo = labels == HYPER, labels == HYPO

    cols = {}
    cols["age"] = np.clip(rng.normal(48, 17, n) + 11 * hypo - 6 * hyper, 1, 94)
    cols["sex"] = _bernoulli_by_class(rng, labels, 0.88, 0.78, 0.64)
    cols["on_thyroxine"] = _bernoulli_by_class(rng, labels, 0.03, 0.36, 0.10)
    cols["query_on_thyroxine"] = _bernoulli_by_class(rng, labels, 0.05, 0.05, 0.05)
    cols["on_antithyroid_meds"] = _bernoulli_by_class(rng, labels, 0.30, 0.01, 0.015)
    cols["sick"] = _bernoulli_by_class(rng, labels, 0.16, 0.22, 0.08)
    cols["pregnant"] = _bernoulli_by_class(rng, labels, 0.03, 0.03, 0.03)
    cols["thyroid_surgery"] = _bernoulli_by_class(rng, labels, 0.03, 0.03, 0.03)
    cols["i131_treatment"] = _bernoulli_by_class(rng, labels, 0.04, 0.04, 0.04)
    cols["query_hypothyroid"] = _bernoulli_by_class(rng, labels, 0.04, 0.55, 0.12)
    cols["query_hyperthyroid"] = _bernoulli_by_class(rng, labels, 0.60, 0.04, 0.10)
    cols["lithium"] = _bernoulli_by_class(rng, labels, 0.015, 0.015, 0.015)
    cols["goitre"] = _bernoulli_by_class(rng, labels, 0.12, 0.02, 0.02)
    cols["tumor"] = _bernoulli_by_class(rng, labels, 0.035, 0.035, 0.035)
    cols["hypopituitary"] = _bernoulli_by_class(rng, labels, 0.01, 0.01, 0.01)
    cols["psych"] = _bernoulli_by_class(rng, labels, 0.05, 0.05, 0.05)

    # One latent severity drives all labs, so they are informative but
    # largely redundant with each other; the index is the crispest readout.
    severity = rng.normal(0.0, 0.20, n) + np.where(hyper, 1.2, 0.0) - np.where(hypo, 1.15, 0.0)
    cols["fti"] = np.clip(105.0 + 95.0 * severity + rng.normal(0, 4.0, n), 2.0, None)
    log_tsh = np.log(1.8) - 1.9 * severity
    cols["tsh"] = np.exp(log_tsh + rng.normal(0, 0.40, n))
    cols["tt4"] = np.clip(104.0 + 32.0 * severity + rng.normal(0, 18.0, n), 2.0, None)
    cols["t3"] = np.clip(2.0 + 1.1 * np.maximum(severity, 0.0) + rng.normal(0, 0.55, n), 0.05, None)
    cols["t4u"] = np.clip(rng.normal(1.0, 0.16, n), 0.25, None)

    schema = thyroid_schema()
    rows = np.column_stack([cols[name] for name in schema.feature_names])
    return TabularDataset(rows=rows, labels=labels, provenance="raw"), schema


def write_thyroid_like(out_dir, n: int = 7200, seed: int = 0) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds, schema = generate_thyroid_like(n=n, seed=seed)
    data_path = out / "thyroid.csv"
    schema_path = out / "thyroid.schema.json"
    write_tabular(ds, schema, data_path, schema_path)
    return data_path, schema_path


def generate_digit_images(
    n: int = 14000, seed: int = 0, size: int = 28, zoom: float = 2.5, gamma: float = 1.8
):
    """Augmented handwritten digits as uint8 images (n, size, size) + labels.

    Each sample is a bundled 8x8 digit upscaled and pasted at a random
    position on a larger canvas, with a gamma curve slimming the
    interpolation halo. The resulting ink fraction (~0.10) and positional
    spread keep uninformed pixel picks genuinely wasteful.
    """
    from sklearn.datasets import load_digits

    base = load_digits()
    images8 = base.images / 16.0  # bundled digits are 0..16
    base_labels = base.target
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = rng.integers(0, len(images8), size=n)
    glyph = int(round(8 * zoom))
    span = size - glyph
    if span < 0:
        raise ValueError("zoomed glyph does not fit the canvas")
    out = np.zeros((n, size, size), dtype=np.uint8)
    offsets = rng.integers(0, span + 1, size=(n, 2))
    noise = rng.normal(0.0, 0.03, size=(n, size, size))
    for i, (pick, (dy, dx)) in enumerate(zip(picks, offsets)):
        img = ndimage.zoom(images8[pick], zoom, order=1, prefilter=False) ** gamma
        canvas = np.zeros((size, size))
        canvas[dy : dy + glyph, dx : dx + glyph] = img
        canvas = np.clip(canvas + noise[i], 0.0, 1.0)
        out[i] = np.round(canvas * 255).astype(np.uint8)
    return out, base_labels[picks].astype(np.uint8)


def write_digits_like(out_dir, n: int = 14000, seed: int = 0, size: int = 28):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images, labels = generate_digit_images(n=n, seed=seed, size=size)
    images_path = out / "digits-images-idx3-ubyte"
    labels_path = out / "digits-labels-idx1-ubyte"
    write_idx_images(images_path, images)
    write_idx_labels(labels_path, labels)
    return images_path, labels_path
