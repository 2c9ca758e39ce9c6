"""Minimal dense-network engine.

Provides forward evaluation, reverse-mode gradients with respect to both
parameters and inputs, Adam training with Beta-distributed input dropout,
and the autoencoder+predictor variant. Everything is plain numpy and
deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, TrainingError

HEAD_SOFTMAX = "softmax"
HEAD_LINEAR = "linear"


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax, max-shifted for stability."""
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class DenseNetwork:
    """Fully connected stack with rectifier hiddens and a softmax (or linear) head.

    Weights are stored as (fan_in, fan_out) matrices so a batch forward is
    `X @ W + b`. The network is immutable after training as far as callers
    are concerned; `forward` and gradient queries are pure.
    """

    def __init__(self, layer_dims, weights, biases, output_head: str = HEAD_SOFTMAX):
        self.layer_dims = tuple(int(d) for d in layer_dims)
        if len(self.layer_dims) < 2 or any(d <= 0 for d in self.layer_dims):
            raise ConfigError(f"bad layer dims {layer_dims}")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.output_head = output_head
        if output_head not in (HEAD_SOFTMAX, HEAD_LINEAR):
            raise ConfigError(f"unknown output head {output_head!r}")
        for l, (din, dout) in enumerate(zip(self.layer_dims, self.layer_dims[1:])):
            if self.weights[l].shape != (din, dout) or self.biases[l].shape != (dout,):
                raise ConfigError(
                    f"layer {l}: weight/bias shapes {self.weights[l].shape}/{self.biases[l].shape} "
                    f"do not match dims ({din}, {dout})"
                )

    @classmethod
    def initialize(cls, layer_dims, rng: np.random.Generator, output_head: str = HEAD_SOFTMAX):
        weights = [
            glorot_uniform(din, dout, rng) for din, dout in zip(layer_dims, layer_dims[1:])
        ]
        biases = [np.zeros(dout) for dout in layer_dims[1:]]
        return cls(layer_dims, weights, biases, output_head)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy_params(self):
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]

    def set_params(self, weights, biases):
        self.weights = [np.asarray(w, dtype=np.float64).copy() for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64).copy() for b in biases]

    def params_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights) and all(
            np.all(np.isfinite(b)) for b in self.biases
        )

    # -- forward ---------------------------------------------------------

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.input_dim:
            raise DataError(f"input has {X.shape[-1]} features, network expects {self.input_dim}")
        return X

    def forward_cache(self, X: np.ndarray):
        """Batch forward returning (output, hidden relu masks, logits)."""
        X = self._check_input(np.atleast_2d(X))
        a = X
        masks = []
        for l in range(self.n_layers - 1):
            z = a @ self.weights[l] + self.biases[l]
            masks.append(z > 0)
            a = np.maximum(z, 0.0)
        logits = a @ self.weights[-1] + self.biases[-1]
        out = softmax(logits) if self.output_head == HEAD_SOFTMAX else logits
        return out, masks, logits

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        out, _, _ = self.forward_cache(X)
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Posterior (or linear output) for a single input vector."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DataError("forward expects a single vector; use forward_batch for matrices")
        if not np.all(np.isfinite(x)):
            raise DataError("input contains non-finite values")
        return self.forward_batch(x[None, :])[0]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward_batch(X), axis=1)

    # -- input gradients ---------------------------------------------------

    def output_seed(self, out: np.ndarray, class_index: int, target: str = "softmax") -> np.ndarray:
        """d(target_k)/d(logits) rows for a batch with stored outputs `out`."""
        n, k_total = out.shape
        if not 0 <= class_index < k_total:
            raise ConfigError(f"class index {class_index} outside [0, {k_total})")
        if target == "logits" or self.output_head == HEAD_LINEAR:
            seed = np.zeros((n, k_total))
            seed[:, class_index] = 1.0
            return seed
        if target != "softmax":
            raise ConfigError(f"unknown gradient target {target!r}")
        onehot = np.zeros(k_total)
        onehot[class_index] = 1.0
        return out[:, class_index : class_index + 1] * (onehot[None, :] - out)

    def delta_first(self, masks, dz_out: np.ndarray) -> np.ndarray:
        """Backpropagate a logits-space delta down to the first pre-activation."""
        dz = dz_out
        for l in range(self.n_layers - 1, 0, -1):
            dz = (dz @ self.weights[l].T) * masks[l - 1]
        return dz

    def input_grad_from_delta(self, dz_first: np.ndarray) -> np.ndarray:
        return dz_first @ self.weights[0].T

    def input_gradient(self, x: np.ndarray, class_index: int, target: str = "softmax") -> np.ndarray:
        """Exact reverse-mode derivative of output[class_index] w.r.t. the input."""
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise DataError("input contains non-finite values")
        out, masks, _ = self.forward_cache(x[None, :])
        seed = self.output_seed(out, class_index, target)
        return self.input_grad_from_delta(self.delta_first(masks, seed))[0]

    # -- serialization helpers (used by model_io) -------------------------

    def to_json_dict(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "output_head": self.output_head,
            "weights": [w.tolist() for w in self.weights],  # row-major (fan_in, fan_out)
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DenseNetwork":
        return cls(d["layer_dims"], d["weights"], d["biases"], d.get("output_head", HEAD_SOFTMAX))


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    epochs: int = 400
    batch_size: int = 32
    dropout_alpha: float = 1.5
    dropout_beta: float = 1.5
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    patience: int = 40

    def validate(self):
        if self.learning_rate < 0:
            raise ConfigError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.dropout_alpha <= 0 or self.dropout_beta <= 0:
            raise ConfigError("dropout alpha/beta must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("bad epochs/batch size")


def sample_dropout_mask(d: int, alpha: float, beta: float, rng: np.random.Generator) -> np.ndarray:
    """One observation mask: 1 = kept, 0 = dropped.

    A drop rate p ~ Beta(alpha, beta) is drawn once, then each feature is
    dropped independently with probability p.
    """
    return sample_dropout_masks(1, d, alpha, beta, rng)[0]


def sample_dropout_masks(
    n: int, d: int, alpha: float, beta: float, rng: np.random.Generator
) -> np.ndarray:
    if d < 1 or n < 1:
        raise ConfigError("mask dimensions must be >= 1")
    if alpha <= 0 or beta <= 0:
        raise ConfigError(f"Beta parameters must be positive, got alpha={alpha}, beta={beta}")
    p = rng.beta(alpha, beta, size=n)
    return (rng.random((n, d)) >= p[:, None]).astype(np.uint8)


class _Adam:
    def __init__(self, net: DenseNetwork, cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.mw = [np.zeros_like(w) for w in net.weights]
        self.vw = [np.zeros_like(w) for w in net.weights]
        self.mb = [np.zeros_like(b) for b in net.biases]
        self.vb = [np.zeros_like(b) for b in net.biases]

    def step(self, net: DenseNetwork, grads_w, grads_b):
        c = self.cfg
        self.t += 1
        bc1 = 1.0 - c.adam_beta1**self.t
        bc2 = 1.0 - c.adam_beta2**self.t
        for l in range(net.n_layers):
            for param, grad, m, v in (
                (net.weights[l], grads_w[l], self.mw[l], self.vw[l]),
                (net.biases[l], grads_b[l], self.mb[l], self.vb[l]),
            ):
                m *= c.adam_beta1
                m += (1 - c.adam_beta1) * grad
                v *= c.adam_beta2
                v += (1 - c.adam_beta2) * grad * grad
                param -= c.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + c.adam_epsilon)


def _backward_params(net: DenseNetwork, X, masks, dz_out):
    """Parameter gradients given the output-space delta of the loss."""
    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    activations = [X]
    a = X
    for l in range(net.n_layers - 1):  # recompute hiddens from masks
        z = a @ net.weights[l] + net.biases[l]
        a = np.maximum(z, 0.0)
        activations.append(a)
    dz = dz_out
    for l in range(net.n_layers - 1, -1, -1):
        grads_w[l] = activations[l].T @ dz
        grads_b[l] = dz.sum(axis=0)
        if l > 0:
            dz = (dz @ net.weights[l].T) * masks[l - 1]
    return grads_w, grads_b


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(lse - shifted[np.arange(len(labels)), labels]))


def accuracy(net: DenseNetwork, X: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(net.predict_batch(X) == y))


def balanced_accuracy(net: DenseNetwork, X: np.ndarray, y: np.ndarray) -> float:
    pred = net.predict_batch(X)
    recalls = [np.mean(pred[y == cls] == cls) for cls in np.unique(y)]
    return float(np.mean(recalls))


def _impute_with_mask(X: np.ndarray, keep: np.ndarray, baseline: np.ndarray) -> np.ndarray:
    return np.where(keep.astype(bool), X, baseline[None, :])


def _train_network(
    net: DenseNetwork,
    X: np.ndarray,
    targets: np.ndarray,
    X_val: np.ndarray,
    val_targets: np.ndarray,
    baseline: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    loss_kind: str,
    use_dropout: bool = True,
):
    """Shared minibatch loop for classifier (CE) and reconstruction (MSE) training.

    Inputs are corrupted by Beta-distributed dropout; dropped entries are
    replaced by the per-feature baseline. Returns the parameters that
    scored best on the validation split (higher accuracy / lower MSE).
    """
    n = len(X)
    best_w, best_b = net.copy_params()
    best_select = -np.inf
    best_stop = np.inf
    stale = 0

    def val_metrics():
        """(selection score to maximize, stopping loss to minimize).

        Parameters are selected by validation accuracy, but stopping
        watches the validation loss: with a dominant majority class the
        accuracy sits on long plateaus that would trip the patience rule
        while the loss is still falling.
        """
        _, _, logits = net.forward_cache(X_val)
        if loss_kind == "ce":
            return accuracy(net, X_val, val_targets), cross_entropy_loss(logits, val_targets)
        mse = float(np.mean((np.clip(logits, 0.0, 1.0) - val_targets) ** 2))
        return -mse, mse

    opt = _Adam(net, cfg)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = X[idx]
            if use_dropout:
                keep = sample_dropout_masks(
                    len(idx), X.shape[1], cfg.dropout_alpha, cfg.dropout_beta, rng
                )
                xb = _impute_with_mask(xb, keep, baseline)
            out, masks, logits = net.forward_cache(xb)
            if loss_kind == "ce":
                yb = targets[idx]
                loss = cross_entropy_loss(logits, yb)
                dz = out.copy()
                dz[np.arange(len(idx)), yb] -= 1.0
                dz /= len(idx)
            else:
                yb = targets[idx]  # clean rows; corruption only touches the inputs
                clipped = np.clip(logits, 0.0, 1.0)
                loss = float(np.mean((clipped - yb) ** 2))
                dz = 2.0 * (clipped - yb) / (len(idx) * X.shape[1])
                dz[(logits < 0.0) | (logits > 1.0)] = 0.0  # clip is flat outside [0, 1]
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged (non-finite) at epoch {epoch}")
            grads_w, grads_b = _backward_params(net, xb, masks, dz)
            opt.step(net, grads_w, grads_b)
        if not net.params_finite():
            raise TrainingError(f"parameters became non-finite at epoch {epoch}")
        select, stop = val_metrics()
        if select > best_select:
            best_select = select
            best_w, best_b = net.copy_params()
        if stop < best_stop - 1e-12:
            best_stop = stop
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    net.set_params(best_w, best_b)
    return net


def train_mlp(train, val, schema, cfg: TrainConfig, hidden_dims=(64, 32, 16)) -> DenseNetwork:
    """Train the dense classifier end-to-end under simulated missingness."""
    cfg.validate()
    if train.n_rows == 0 or val.n_rows == 0:
        raise DataError("empty dataset")
    baseline = train.baseline if train.baseline is not None else train.rows.mean(axis=0)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    dims = [train.n_features, *hidden_dims, schema.class_count]
    net = DenseNetwork.initialize(dims, rng)
    return _train_network(
        net, train.rows, train.labels, val.rows, val.labels, baseline, cfg, rng, "ce"
    )


@dataclass
class DaeNetwork:
    """Denoising autoencoder plus classification head.

    `autoencoder` is encoder+decoder glued into one linear-head stack;
    `classifier` is the fine-tuned encoder with the predictor head and is
    what downstream attribution and acquisition operate on.
    """

    autoencoder: DenseNetwork
    classifier: DenseNetwork
    encoder_depth: int = 2

    def __post_init__(self):
        if self.autoencoder.layer_dims[-1] != self.autoencoder.layer_dims[0]:
            raise ConfigError("decoder output dimension must equal encoder input dimension")

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.classifier.forward(x)

    def reconstruct_batch(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.autoencoder.forward_batch(X), 0.0, 1.0)

    def reconstruction_error(self, X: np.ndarray) -> float:
        return float(np.mean((self.reconstruct_batch(X) - X) ** 2))


def train_dae_predictor(
    train,
    val,
    schema,
    cfg: TrainConfig,
    encoder_dims=(64, 32),
    decoder_dims=(64,),
    predictor_dims=(16,),
    predictor_epochs: int | None = None,
    phase1_dropout: bool = True,
) -> DaeNetwork:
    """Two-phase training: denoising reconstruction, then classifier fine-tuning."""
    cfg.validate()
    if train.n_rows == 0 or val.n_rows == 0:
        raise DataError("empty dataset")
    baseline = train.baseline if train.baseline is not None else train.rows.mean(axis=0)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    d = train.n_features

    ae_dims = [d, *encoder_dims, *decoder_dims, d]
    ae = DenseNetwork.initialize(ae_dims, rng, output_head=HEAD_LINEAR)
    _train_network(
        ae, train.rows, train.rows, val.rows, val.rows, baseline, cfg, rng, "mse",
        use_dropout=phase1_dropout,
    )

    clf_dims = [d, *encoder_dims, *predictor_dims, schema.class_count]
    clf = DenseNetwork.initialize(clf_dims, rng)
    for l in range(len(encoder_dims)):  # warm-start the encoder stack
        clf.weights[l] = ae.weights[l].copy()
        clf.biases[l] = ae.biases[l].copy()
    phase2 = TrainConfig(**{**cfg.__dict__, "epochs": cfg.epochs if predictor_epochs is None else predictor_epochs})
    _train_network(clf, train.rows, train.labels, val.rows, val.labels, baseline, phase2, rng, "ce")
    return DaeNetwork(autoencoder=ae, classifier=clf, encoder_depth=len(encoder_dims))
