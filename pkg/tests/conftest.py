"""Shared fixtures.

Heavy deterministic artifacts (trained models, benchmark runs) are cached
under tests/_cache keyed by a fingerprint of the package sources, so
repeated pytest runs skip re-training while any code change invalidates
the cache. Set FEATACQ_TEST_CACHE=0 to disable.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

import numpy as np
import pytest

from featacq.data import SplitSpec, compute_baseline, generate_synthesized, split, winsorize_and_scale
from featacq.model_io import ModelBundle
from featacq.nnet import TrainConfig, train_mlp

PKG_SRC = Path(__file__).resolve().parent.parent / "src" / "featacq"
CACHE_ROOT = Path(__file__).resolve().parent / "_cache"


def source_fingerprint() -> str:
    h = hashlib.sha256()
    for p in sorted(PKG_SRC.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def cache_dir(name: str) -> Path:
    """Directory for a named cached artifact, fingerprinted by the sources."""
    if os.environ.get("FEATACQ_TEST_CACHE", "1") == "0":
        import tempfile

        return Path(tempfile.mkdtemp(prefix=f"featacq-{name}-"))
    d = CACHE_ROOT / source_fingerprint() / name
    d.mkdir(parents=True, exist_ok=True)
    return d


@pytest.fixture(scope="session")
def small_problem():
    """A quickly trainable 10-feature problem with a trained bundle."""
    ds, schema = generate_synthesized(n=1500, d=10, seed=11)
    train, val, test = split(ds, SplitSpec(seed=11))
    train, bounds = winsorize_and_scale(train, schema)
    val, _ = winsorize_and_scale(val, schema, bounds=bounds)
    test, _ = winsorize_and_scale(test, schema, bounds=bounds)
    train.baseline = compute_baseline(train.rows)
    cfg = TrainConfig(epochs=60, learning_rate=5e-4, seed=11, patience=60)
    net = train_mlp(train, val, schema, cfg)
    bundle = ModelBundle(
        net=net, baseline=train.baseline, bounds=bounds,
        schema_hash=schema.hash(), dataset_tag="small", split_seed=11,
    )
    return {
        "schema": schema, "bundle": bundle, "net": net,
        "train": train, "val": val, "test": test, "bounds": bounds,
    }


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(1234))
