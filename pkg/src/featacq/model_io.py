"""Versioned model files.

A model file is one JSON document holding the network parameters, the
per-feature imputation baseline, the preprocessing bounds fitted at
training time, split bookkeeping, and the hash of the schema it was
trained against. Loading verifies the schema hash.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DatasetSchema, FeatureBounds
from .errors import ModelFormatError
from .nnet import DaeNetwork, DenseNetwork

FORMAT_VERSION = 1


@dataclass
class ModelBundle:
    """A trained classifier together with everything needed to deploy it."""

    net: DenseNetwork
    baseline: np.ndarray
    bounds: FeatureBounds
    schema_hash: str
    dataset_tag: str = ""
    split_seed: int = 0
    autoencoder: DenseNetwork | None = None

    @property
    def input_dim(self) -> int:
        return self.net.input_dim

    @property
    def class_count(self) -> int:
        return self.net.output_dim

    @property
    def kind(self) -> str:
        return "dae" if self.autoencoder is not None else "mlp"

    def check_schema(self, schema: DatasetSchema):
        if schema.hash() != self.schema_hash:
            raise ModelFormatError(
                "schema hash mismatch: the model was trained against a different schema"
            )


def save_model(bundle: ModelBundle, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": bundle.kind,
        "schema_hash": bundle.schema_hash,
        "dataset_tag": bundle.dataset_tag,
        "split_seed": bundle.split_seed,
        "baseline": [float(v) for v in bundle.baseline],
        "bounds": bundle.bounds.to_json_dict(),
        "network": bundle.net.to_json_dict(),
    }
    if bundle.autoencoder is not None:
        doc["autoencoder"] = bundle.autoencoder.to_json_dict()
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path, schema: DatasetSchema | None = None) -> ModelBundle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version!r}")
    try:
        bundle = ModelBundle(
            net=DenseNetwork.from_json_dict(doc["network"]),
            baseline=np.asarray(doc["baseline"], dtype=np.float64),
            bounds=FeatureBounds.from_json_dict(doc["bounds"]),
            schema_hash=str(doc["schema_hash"]),
            dataset_tag=str(doc.get("dataset_tag", "")),
            split_seed=int(doc.get("split_seed", 0)),
            autoencoder=(
                DenseNetwork.from_json_dict(doc["autoencoder"]) if "autoencoder" in doc else None
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file {path}: {exc}") from exc
    if len(bundle.baseline) != bundle.net.input_dim:
        raise ModelFormatError("baseline length does not match network input dimension")
    if schema is not None:
        bundle.check_schema(schema)
    return bundle


def bundle_from_dae(dae: DaeNetwork, baseline, bounds, schema_hash, **kw) -> ModelBundle:
    return ModelBundle(
        net=dae.classifier, baseline=np.asarray(baseline), bounds=bounds,
        schema_hash=schema_hash, autoencoder=dae.autoencoder, **kw,
    )
