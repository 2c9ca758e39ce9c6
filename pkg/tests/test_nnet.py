"""Dense network: forward, input gradients, dropout, and training."""

import math

import numpy as np
import pytest
from scipy import stats

from featacq.data import DatasetSchema, TabularDataset
from featacq.errors import ConfigError, DataError, TrainingError
from featacq.nnet import (
    DenseNetwork,
    TrainConfig,
    accuracy,
    sample_dropout_mask,
    sample_dropout_masks,
    train_dae_predictor,
    train_mlp,
)


def random_net(rng, dims=None):
    dims = dims or [6, 10, 5, 3]
    return DenseNetwork.initialize(dims, rng)


def finite_difference_gradient(net, x, k, h=1e-5):
    fd = np.zeros(len(x))
    for j in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fd[j] = (net.forward(xp)[k] - net.forward(xm)[k]) / (2 * h)
    return fd


class TestForward:
    def test_zero_weight_net_is_uniform(self):
        net = DenseNetwork([4, 3], [np.zeros((4, 3))], [np.zeros(3)])
        p = net.forward(np.array([0.3, 0.9, 0.1, 0.5]))
        np.testing.assert_allclose(p, [1 / 3] * 3, atol=1e-15)

    def test_single_layer_matches_hand_computed_softmax(self):
        # softmax(Wx + b) worked out with explicit arithmetic
        W = np.array([[0.3, -0.2], [0.1, 0.4]])
        b = np.array([0.05, -0.05])
        x = np.array([0.6, 0.5])
        net = DenseNetwork([2, 2], [W], [b])
        z0 = 0.6 * 0.3 + 0.5 * 0.1 + 0.05
        z1 = 0.6 * -0.2 + 0.5 * 0.4 - 0.05
        e0, e1 = math.exp(z0), math.exp(z1)
        np.testing.assert_allclose(net.forward(x), [e0 / (e0 + e1), e1 / (e0 + e1)], rtol=1e-15)

    def test_posterior_normalized_and_nonnegative(self, rng):
        net = random_net(rng)
        for _ in range(50):
            p = net.forward(rng.uniform(-2, 2, 6))
            assert abs(p.sum() - 1.0) <= 1e-9
            assert np.all(p >= 0)

    def test_dimension_mismatch_rejected(self, rng):
        net = random_net(rng)
        with pytest.raises(DataError, match="features"):
            net.forward(np.zeros(5))

    def test_deterministic(self, rng):
        net = random_net(rng)
        x = rng.random(6)
        np.testing.assert_array_equal(net.forward(x), net.forward(x))


class TestInputGradient:
    def test_zero_weight_net_has_zero_gradient(self):
        net = DenseNetwork([4, 2], [np.zeros((4, 2))], [np.zeros(2)])
        np.testing.assert_array_equal(net.input_gradient(np.ones(4), 0), np.zeros(4))

    def test_matches_finite_differences_200_triples(self, rng):
        # acceptance-grade property at unit-test scale: random nets/inputs/classes
        for _ in range(40):
            dims = [int(rng.integers(2, 8)), int(rng.integers(3, 12)), int(rng.integers(2, 5))]
            net = random_net(rng, dims)
            for _ in range(5):
                x = rng.uniform(-1, 1, dims[0])
                k = int(rng.integers(0, dims[-1]))
                g = net.input_gradient(x, k)
                fd = finite_difference_gradient(net, x, k)
                err = np.abs(g - fd) / np.maximum(1e-6, np.maximum(np.abs(g), np.abs(fd)))
                assert err.max() < 1e-4

    def test_two_class_antisymmetry(self, rng):
        net = random_net(rng, [5, 8, 2])
        for _ in range(20):
            x = rng.uniform(0, 1, 5)
            g0 = net.input_gradient(x, 0)
            g1 = net.input_gradient(x, 1)
            np.testing.assert_allclose(g0, -g1, atol=1e-12)

    def test_invalid_class_rejected(self, rng):
        net = random_net(rng)
        with pytest.raises(ConfigError, match="class index"):
            net.input_gradient(np.zeros(6), 3)


class TestDropoutMask:
    def test_same_seed_same_mask(self):
        a = sample_dropout_mask(32, 1.5, 1.5, np.random.Generator(np.random.PCG64(7)))
        b = sample_dropout_mask(32, 1.5, 1.5, np.random.Generator(np.random.PCG64(7)))
        np.testing.assert_array_equal(a, b)

    def test_mean_drop_fraction_matches_beta_mean(self, rng):
        masks = sample_dropout_masks(100_000, 64, 1.5, 1.5, rng)
        drop_fraction = 1.0 - masks.mean()
        assert abs(drop_fraction - 0.5) < 0.01

    def test_variance_matches_compound_distribution(self, rng):
        # Var of per-sample drop fraction: Var[p] + E[p(1-p)]/d for p ~ Beta(a, b)
        d = 64
        masks = sample_dropout_masks(100_000, d, 1.5, 1.5, rng)
        per_sample = 1.0 - masks.mean(axis=1)
        beta = stats.beta(1.5, 1.5)
        var_p = beta.var()
        e_p1p = beta.mean() - (beta.var() + beta.mean() ** 2)
        expected = var_p + e_p1p / d
        assert var_p == pytest.approx(0.0625)
        assert abs(np.var(per_sample) - expected) < 0.005

    def test_nonpositive_parameters_rejected(self, rng):
        with pytest.raises(ConfigError):
            sample_dropout_mask(8, 0.0, 1.5, rng)
        with pytest.raises(ConfigError):
            sample_dropout_mask(8, 1.5, -1.0, rng)


def tiny_classification_data(rng, n=400, d=6, informative=3):
    labels = rng.integers(0, 2, n)
    centers = np.where(labels[:, None] == 1, 0.7, 0.3)
    rows = rng.normal(0.5, 0.15, (n, d))
    rows[:, :informative] = rng.normal(centers, 0.12, (n, informative))
    rows = np.clip(rows, 0, 1)
    train = TabularDataset(rows=rows[: n - 100], labels=labels[: n - 100])
    train.baseline = train.rows.mean(axis=0)
    val = TabularDataset(rows=rows[n - 100 :], labels=labels[n - 100 :])
    schema = DatasetSchema(
        feature_names=tuple(f"f{i}" for i in range(d)),
        feature_kinds=tuple(["real"] * d),
        costs=np.ones(d),
        class_names=("a", "b"),
    )
    return train, val, schema


class TestTraining:
    def test_learns_above_chance(self, rng):
        train, val, schema = tiny_classification_data(rng)
        cfg = TrainConfig(epochs=50, learning_rate=1e-3, seed=0, patience=50)
        net = train_mlp(train, val, schema, cfg)
        assert accuracy(net, val.rows, val.labels) > 0.5 + 0.20

    def test_zero_learning_rate_leaves_parameters_at_init(self, rng):
        train, val, schema = tiny_classification_data(rng, n=150)
        cfg = TrainConfig(epochs=3, learning_rate=0.0, seed=4)
        net = train_mlp(train, val, schema, cfg)
        fresh = DenseNetwork.initialize(
            [train.n_features, 64, 32, 16, 2], np.random.Generator(np.random.PCG64(4))
        )
        for got, exp in zip(net.weights, fresh.weights):
            np.testing.assert_array_equal(got, exp)

    def test_same_seed_bitwise_identical_parameters(self, rng):
        train, val, schema = tiny_classification_data(rng, n=200)
        cfg = TrainConfig(epochs=5, seed=9)
        a = train_mlp(train, val, schema, cfg)
        b = train_mlp(train, val, schema, TrainConfig(epochs=5, seed=9))
        for wa, wb in zip(a.weights, b.weights):
            assert wa.tobytes() == wb.tobytes()
        for ba, bb in zip(a.biases, b.biases):
            assert ba.tobytes() == bb.tobytes()

    def test_empty_dataset_rejected(self, rng):
        train, val, schema = tiny_classification_data(rng, n=150)
        empty = TabularDataset(rows=np.zeros((0, train.n_features)), labels=np.zeros(0, dtype=int))
        with pytest.raises(DataError, match="empty"):
            train_mlp(empty, val, schema, TrainConfig(epochs=1))

    def test_divergence_names_epoch(self, rng):
        train, val, schema = tiny_classification_data(rng, n=200)
        cfg = TrainConfig(epochs=5, learning_rate=1e300, seed=0)
        with pytest.raises(TrainingError, match="epoch"):
            train_mlp(train, val, schema, cfg)

    def test_parameters_finite_after_training(self, rng):
        train, val, schema = tiny_classification_data(rng, n=200)
        net = train_mlp(train, val, schema, TrainConfig(epochs=8, seed=1))
        assert net.params_finite()


class TestDaePredictor:
    def test_reconstruction_error_decreases_without_dropout(self, rng):
        train, val, schema = tiny_classification_data(rng, n=400)
        errors = []
        for epochs in range(1, 6):
            cfg = TrainConfig(epochs=epochs, learning_rate=2e-3, seed=3, patience=99)
            dae = train_dae_predictor(
                train, val, schema, cfg, predictor_epochs=0, phase1_dropout=False
            )
            errors.append(dae.reconstruction_error(val.rows))
        assert all(a > b for a, b in zip(errors, errors[1:])), errors

    def test_zero_epoch_predictor_is_near_uniform(self, rng):
        train, val, schema = tiny_classification_data(rng, n=200)
        cfg = TrainConfig(epochs=2, seed=5)
        dae = train_dae_predictor(train, val, schema, cfg, predictor_epochs=0)
        posts = dae.classifier.forward_batch(val.rows)
        assert np.max(np.abs(posts - 0.5)) < 0.25

    def test_classifier_close_to_plain_mlp(self, rng):
        train, val, schema = tiny_classification_data(rng, n=500)
        cfg = TrainConfig(epochs=40, learning_rate=1e-3, seed=7, patience=40)
        mlp = train_mlp(train, val, schema, cfg)
        dae = train_dae_predictor(train, val, schema, cfg)
        acc_mlp = accuracy(mlp, val.rows, val.labels)
        acc_dae = accuracy(dae.classifier, val.rows, val.labels)
        assert abs(acc_mlp - acc_dae) <= 0.05

    def test_decoder_output_dim_equals_input_dim(self, rng):
        train, val, schema = tiny_classification_data(rng, n=150)
        dae = train_dae_predictor(train, val, schema, TrainConfig(epochs=1, seed=0))
        assert dae.autoencoder.layer_dims[-1] == train.n_features
        recon = dae.reconstruct_batch(val.rows)
        assert recon.min() >= 0.0 and recon.max() <= 1.0
