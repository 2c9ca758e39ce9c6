"""Command-line interface: train, bench, synth, demo-data, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import demo
from .benchmark import BenchConfig, run_benchmark
from .data import (
    FeatureBounds,
    SplitSpec,
    compute_baseline,
    generate_synthesized,
    load_mnist,
    load_tabular,
    split,
    winsorize_and_scale,
    write_tabular,
)
from .errors import ConfigError, FeatacqError
from .model_io import ModelBundle, bundle_from_dae, save_model
from .nnet import TrainConfig, accuracy, balanced_accuracy, train_dae_predictor, train_mlp


def _fail(exc: BaseException):
    line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
    click.echo(line, err=True)
    sys.exit(1)


@click.group()
def main():
    """Cost-aware sequential feature acquisition toolkit."""


def _load_any(data, schema, labels, data_format):
    if data_format == "idx":
        if labels is None:
            raise ConfigError("--format idx requires --labels")
        return load_mnist(data, labels)
    if schema is None:
        raise ConfigError("--format tabular requires --schema")
    return load_tabular(data, schema)


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--schema", type=click.Path(exists=True), default=None)
@click.option("--labels", type=click.Path(exists=True), default=None, help="IDX label file")
@click.option("--format", "data_format", type=click.Choice(["tabular", "idx"]), default="tabular")
@click.option("--out-model", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
@click.option("--epochs", default=400, type=int)
@click.option("--lr", default=1e-4, type=float)
@click.option("--alpha", default=1.5, type=float, help="Beta dropout alpha")
@click.option("--beta", default=1.5, type=float, help="Beta dropout beta")
@click.option("--batch-size", default=32, type=int)
@click.option("--arch", type=click.Choice(["mlp", "dae"]), default="mlp")
def train(data, schema, labels, data_format, out_model, seed, epochs, lr, alpha, beta, batch_size, arch):
    """Train a classifier under simulated missingness and save the model file."""
    try:
        ds, ds_schema = _load_any(data, schema, labels, data_format)
        train_ds, val_ds, test_ds = split(ds, SplitSpec(seed=seed))
        if data_format == "tabular":
            train_ds, bounds = winsorize_and_scale(train_ds, ds_schema)
            val_ds, _ = winsorize_and_scale(val_ds, ds_schema, bounds=bounds)
        else:
            d = ds.n_features
            bounds = FeatureBounds(lower=np.zeros(d), upper=np.ones(d))
        train_ds.baseline = compute_baseline(train_ds.rows)
        cfg = TrainConfig(
            learning_rate=lr, epochs=epochs, batch_size=batch_size,
            dropout_alpha=alpha, dropout_beta=beta, seed=seed,
        )
        tag = Path(data).stem
        if arch == "dae":
            dae = train_dae_predictor(train_ds, val_ds, ds_schema, cfg)
            bundle = bundle_from_dae(
                dae, train_ds.baseline, bounds, ds_schema.hash(),
                dataset_tag=tag, split_seed=seed,
            )
        else:
            net = train_mlp(train_ds, val_ds, ds_schema, cfg)
            bundle = ModelBundle(
                net=net, baseline=train_ds.baseline, bounds=bounds,
                schema_hash=ds_schema.hash(), dataset_tag=tag, split_seed=seed,
            )
        save_model(bundle, out_model)
        val_acc = accuracy(bundle.net, val_ds.rows, val_ds.labels)
        val_bal = balanced_accuracy(bundle.net, val_ds.rows, val_ds.labels)
        click.echo(
            f"saved {out_model} (val accuracy {val_acc:.4f}, balanced {val_bal:.4f}, "
            f"train/val/test = {train_ds.n_rows}/{val_ds.n_rows}/{test_ds.n_rows})"
        )
    except FeatacqError as exc:
        _fail(exc)


class _BudgetType(click.ParamType):
    name = "budget"

    def convert(self, value, param, ctx):
        if value is None or str(value).lower() == "none":
            return None
        try:
            return float(value)
        except ValueError:
            self.fail(f"{value!r} is not a number or 'none'", param, ctx)


@main.command()
@click.option("--model", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--schema", type=click.Path(exists=True), default=None)
@click.option("--labels", type=click.Path(exists=True), default=None)
@click.option("--format", "data_format", type=click.Choice(["tabular", "idx"]), default="tabular")
@click.option("--policies", default="aig,random,plain_gradient", show_default=True)
@click.option("--m", "steps_m", default=50, type=int, help="path-integral steps")
@click.option("--budget", type=_BudgetType(), default=None)
@click.option("--seed", default=0, type=int)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--limit-rows", default=None, type=int, help="subsample the test split")
@click.option("--heatmap-samples", default=10, type=int)
@click.option("--plots/--no-plots", "render_plots", default=True)
@click.option("--dump-trajectories", is_flag=True, default=False)
@click.option("--ig-origin", type=click.Choice(["zeros", "baseline"]), default="zeros")
@click.option("--class-agg", type=click.Choice(["abs_then_sum", "sum_then_abs"]), default="abs_then_sum")
@click.option("--ig-target", type=click.Choice(["softmax", "logits"]), default="softmax")
def bench(model, data, schema, labels, data_format, policies, steps_m, budget, seed, out_dir,
          limit_rows, heatmap_samples, render_plots, dump_trajectories, ig_origin, class_agg, ig_target):
    """Run acquisition episodes over the test split and write report files."""
    try:
        cfg = BenchConfig(
            model_path=model, data_path=data, schema_path=schema, labels_path=labels,
            data_format=data_format, policies=tuple(p.strip() for p in policies.split(",") if p.strip()),
            steps_m=steps_m, budget=budget, seed=seed, out_dir=out_dir, limit_rows=limit_rows,
            heatmap_samples=heatmap_samples, render_plots=render_plots,
            dump_trajectories=dump_trajectories, ig_origin=ig_origin,
            class_agg=class_agg, ig_target=ig_target,
        )
        report = run_benchmark(cfg)
        for name in report.curves:
            click.echo(
                f"{name}: cost-AUC {report.auc[name]:.4f}, "
                f"accuracy {report.accuracy_step0[name]:.4f} -> {report.accuracy_full[name]:.4f}"
            )
        click.echo(f"report written to {out_dir}")
    except FeatacqError as exc:
        _fail(exc)


@main.command()
@click.option("--n", default=16000, type=int, show_default=True)
@click.option("--d", default=64, type=int, show_default=True)
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
def synth(n, d, seed, out):
    """Generate the synthesized two-class benchmark dataset (CSV + schema)."""
    try:
        ds, schema = generate_synthesized(n=n, d=d, seed=seed)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        data_path = out_dir / "synthesized.csv"
        schema_path = out_dir / "synthesized.schema.json"
        write_tabular(ds, schema, data_path, schema_path)
        click.echo(f"wrote {data_path} and {schema_path}")
    except FeatacqError as exc:
        _fail(exc)


@main.command("demo-data")
@click.argument("which", type=click.Choice(["thyroid", "digits"]))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
@click.option("--n", default=None, type=int, help="sample count override")
def demo_data(which, out, seed, n):
    """Write a deterministic demo dataset (thyroid-like CSV or digit IDX files)."""
    try:
        if which == "thyroid":
            paths = demo.write_thyroid_like(out, n=n or 7200, seed=seed)
        else:
            paths = demo.write_digits_like(out, n=n or 14000, seed=seed)
        click.echo("wrote " + " and ".join(str(p) for p in paths))
    except FeatacqError as exc:
        _fail(exc)


@main.command()
@click.option("--addr", envvar="ACQ_ADDR", default="127.0.0.1:8000", show_default=True)
@click.option("--model-dir", envvar="ACQ_MODEL_DIR", required=True, type=click.Path(exists=True))
@click.option("--session-ttl", default=86400.0, type=float, help="seconds before idle sessions expire")
def serve(addr, model_dir, session_ttl):
    """Serve interactive acquisition sessions over HTTP."""
    try:
        import uvicorn

        from .service import ModelRegistry, create_app

        registry = ModelRegistry.from_directory(model_dir)
        app = create_app(registry, session_ttl=session_ttl)
        host, _, port = addr.partition(":")
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    except FeatacqError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
