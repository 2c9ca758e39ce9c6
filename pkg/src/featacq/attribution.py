"""Feature attribution: path-integrated gradients and cost-scaled scores.

`integrated_gradients` approximates the path integral with a right-endpoint
Riemann sum over m steps from a reference point to the observation.
`accumulated_ig` aggregates per-class attributions and divides by the
acquisition cost; it is the default policy score for acquisition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SchemaError
from .nnet import DenseNetwork

AGG_ABS_THEN_SUM = "abs_then_sum"  # sum_k |IG_k|   (default; robust for softmax heads)
AGG_SUM_THEN_ABS = "sum_then_abs"  # |sum_k IG_k|   (degenerates to ~0 for softmax heads)

TARGET_SOFTMAX = "softmax"
TARGET_LOGITS = "logits"

# Keep quadrature batches below ~5M doubles so the 784-dim runs stay in cache-friendly chunks.
_CHUNK_BUDGET = 5_000_000


@dataclass
class IgConfig:
    """Quadrature resolution and the path origin for integrated gradients.

    `baseline` is the reference input the path starts from. Predictions in
    this package always impute unobserved features at the training means;
    for acquisition scoring the path origin is chosen separately (see the
    acquisition engine), because a path that starts exactly at the imputed
    values assigns zero attribution to every still-unobserved feature.
    """

    steps: int = 50
    baseline: np.ndarray = field(default_factory=lambda: np.zeros(0))
    target: str = TARGET_SOFTMAX

    def validate(self, d: int):
        if self.steps < 1:
            raise ConfigError(f"integration steps must be >= 1, got {self.steps}")
        if self.baseline.shape != (d,):
            raise ConfigError(f"baseline has shape {self.baseline.shape}, expected ({d},)")
        if self.target not in (TARGET_SOFTMAX, TARGET_LOGITS):
            raise ConfigError(f"unknown attribution target {self.target!r}")


@dataclass
class AttributionVector:
    """Per-feature nonnegative scores at one acquisition step."""

    scores: np.ndarray
    step_index: int
    policy_tag: str

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(self.scores)):
            raise ConfigError("attribution scores must be finite")
        if np.any(self.scores < 0):
            raise ConfigError("attribution scores must be nonnegative")


def path_gradient_batch(
    net: DenseNetwork,
    X: np.ndarray,
    origin: np.ndarray,
    steps: int,
    class_index: int,
    target: str = TARGET_SOFTMAX,
) -> np.ndarray:
    """Average gradient of output[class_index] along the straight path origin -> row.

    Right-endpoint rule: the gradient is evaluated at origin + (s/m)*(x-origin)
    for s = 1..m and averaged. Returns an (n, d) matrix.

    The per-point input gradient is W1-transposed applied to the first
    pre-activation delta; by linearity the delta is summed over the
    quadrature points first so only one input-space projection per class
    is needed.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    diff = X - origin[None, :]
    chunk = max(1, min(steps, _CHUNK_BUDGET // max(1, n * d)))
    acc = np.zeros((n, net.layer_dims[1] if net.n_layers > 1 else net.output_dim))
    s = 1
    while s <= steps:
        s_hi = min(steps, s + chunk - 1)
        fracs = np.arange(s, s_hi + 1, dtype=np.float64) / steps
        pts = origin[None, None, :] + fracs[:, None, None] * diff[None, :, :]
        out, masks, _ = net.forward_cache(pts.reshape(-1, d))
        seed = net.output_seed(out, class_index, target)
        delta = net.delta_first(masks, seed)
        acc += delta.reshape(len(fracs), n, -1).sum(axis=0)
        s = s_hi + 1
    return net.input_grad_from_delta(acc / steps)


def integrated_gradients(
    net: DenseNetwork, x_obs: np.ndarray, cfg: IgConfig, class_index: int
) -> np.ndarray:
    """Per-feature attribution of output[class_index] for one observation."""
    x_obs = np.asarray(x_obs, dtype=np.float64)
    cfg.validate(len(x_obs))
    grad = path_gradient_batch(net, x_obs[None, :], cfg.baseline, cfg.steps, class_index, cfg.target)
    return (x_obs - cfg.baseline) * grad[0]


def _check_costs(costs: np.ndarray, d: int) -> np.ndarray:
    costs = np.asarray(costs, dtype=np.float64)
    if costs.shape != (d,):
        raise SchemaError(f"cost vector has shape {costs.shape}, expected ({d},)")
    if np.any(costs <= 0):
        raise SchemaError("all feature costs must be strictly positive")
    return costs


def _path_deltas_all_classes(net, X, origin, steps, target):
    """First-layer deltas averaged over the path, for every class at once.

    Returns (K, n, h) where h is the first post-input width. One forward
    pass per quadrature chunk is shared by all K backward sweeps.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    k_total = net.output_dim
    diff = X - origin[None, :]
    chunk = max(1, min(steps, _CHUNK_BUDGET // max(1, n * d)))
    acc = np.zeros((k_total, n, net.layer_dims[1]))
    s = 1
    while s <= steps:
        s_hi = min(steps, s + chunk - 1)
        fracs = np.arange(s, s_hi + 1, dtype=np.float64) / steps
        pts = origin[None, None, :] + fracs[:, None, None] * diff[None, :, :]
        out, masks, _ = net.forward_cache(pts.reshape(-1, d))
        for k in range(k_total):
            seed = net.output_seed(out, k, target)
            delta = net.delta_first(masks, seed)
            acc[k] += delta.reshape(len(fracs), n, -1).sum(axis=0)
        s = s_hi + 1
    return acc / steps


def aig_scores_batch(
    net: DenseNetwork,
    X: np.ndarray,
    origin: np.ndarray,
    steps: int,
    costs: np.ndarray,
    class_agg: str = AGG_ABS_THEN_SUM,
    target: str = TARGET_SOFTMAX,
) -> np.ndarray:
    """Cost-scaled class-aggregated attribution for every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    costs = _check_costs(costs, d)
    if class_agg not in (AGG_ABS_THEN_SUM, AGG_SUM_THEN_ABS):
        raise ConfigError(f"unknown class aggregation {class_agg!r}")
    diff = X - origin[None, :]
    deltas = _path_deltas_all_classes(net, X, origin, steps, target)
    k_total = net.output_dim
    # one stacked projection back to input space for all classes
    grads = net.input_grad_from_delta(deltas.reshape(k_total * n, -1)).reshape(k_total, n, d)
    ig = diff[None, :, :] * grads
    total = np.abs(ig).sum(axis=0) if class_agg == AGG_ABS_THEN_SUM else np.abs(ig.sum(axis=0))
    return total / costs[None, :]


def accumulated_ig(
    net: DenseNetwork,
    x_obs: np.ndarray,
    cfg: IgConfig,
    costs: np.ndarray,
    class_agg: str = AGG_ABS_THEN_SUM,
    step_index: int = 0,
) -> AttributionVector:
    """Class-aggregated integrated gradients divided by per-feature cost."""
    x_obs = np.asarray(x_obs, dtype=np.float64)
    cfg.validate(len(x_obs))
    scores = aig_scores_batch(
        net, x_obs[None, :], cfg.baseline, cfg.steps, costs, class_agg, cfg.target
    )[0]
    return AttributionVector(scores=scores, step_index=step_index, policy_tag="aig")


def plain_gradient_scores_batch(
    net: DenseNetwork, X: np.ndarray, costs: np.ndarray, target: str = TARGET_SOFTMAX
) -> np.ndarray:
    """Single-point comparator: sum_k |d output_k / d x_i| at X itself, over cost."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    costs = _check_costs(costs, d)
    out, masks, _ = net.forward_cache(X)
    total = np.zeros((n, d))
    for k in range(net.output_dim):
        seed = net.output_seed(out, k, target)
        grad = net.input_grad_from_delta(net.delta_first(masks, seed))
        total += np.abs(grad)
    return total / costs[None, :]


def plain_gradient_attribution(
    net: DenseNetwork,
    x_obs: np.ndarray,
    costs: np.ndarray,
    target: str = TARGET_SOFTMAX,
    step_index: int = 0,
) -> AttributionVector:
    """Gradient magnitude at the current observation, without a path integral."""
    scores = plain_gradient_scores_batch(net, np.asarray(x_obs)[None, :], costs, target)[0]
    return AttributionVector(scores=scores, step_index=step_index, policy_tag="plain_gradient")
