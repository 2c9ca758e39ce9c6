"""Batch evaluation: accuracy-vs-count and accuracy-vs-cost curves,
acquisition-order heatmaps, and the benchmark driver behind the CLI.

Report files are deterministic for a fixed config: CSV for curves, JSON
for heatmaps and the summary. Figures are rendered next to them; timing
goes to a separate log because wall-clock is not reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import SplitSpec, load_mnist, load_tabular, split, winsorize_and_scale
from .engine import EpisodeSet, make_policy, run_episodes_batch
from .errors import ConfigError, DataError
from .model_io import ModelBundle, load_model
from .nnet import balanced_accuracy

X_AXIS_COUNT = "count"
X_AXIS_COST = "cost"


@dataclass(frozen=True)
class CurvePoint:
    x_value: float
    accuracy: float
    n_samples: int


@dataclass
class HeatmapMatrix:
    """Acquisition ranks per sample: 1 = first acquired, 0 = never."""

    matrix: np.ndarray
    sample_indices: list[int]
    feature_names: list[str]

    def to_json_dict(self) -> dict:
        return {
            "sample_indices": [int(i) for i in self.sample_indices],
            "feature_names": list(self.feature_names),
            "matrix": [[int(v) for v in row] for row in self.matrix],
        }


def build_count_curve(episodes: EpisodeSet) -> list[CurvePoint]:
    """Accuracy after exactly k acquisitions, k = 0..d (carried forward
    for rows that stopped early under a budget)."""
    if episodes.budget is None and not np.all(episodes.steps_taken() == episodes.n_features):
        raise DataError("trajectory lengths differ although no budget was set")
    points = []
    for k in range(episodes.n_features + 1):
        acc = float(np.mean(episodes.preds[:, k] == episodes.labels))
        points.append(CurvePoint(x_value=float(k), accuracy=acc, n_samples=episodes.n_rows))
    return points


def _cost_grid(episodes: EpisodeSet) -> np.ndarray:
    observed = episodes.costs[np.isfinite(episodes.costs)]
    grid = np.unique(np.concatenate([[0.0], observed.ravel()]))
    return grid


def build_cost_curve(episodes: EpisodeSet, grid: np.ndarray | None = None) -> list[CurvePoint]:
    """Accuracy of the prediction held after the last acquisition whose
    accumulated cost is within each grid budget."""
    if grid is None:
        grid = _cost_grid(episodes)
    else:
        grid = np.asarray(grid, dtype=np.float64)
        if np.any(np.diff(grid) < 0):
            raise ConfigError("cost grid must be sorted ascending")
    correct_counts = np.zeros(len(grid))
    for i in range(episodes.n_rows):
        row_costs = episodes.costs[i][np.isfinite(episodes.costs[i])]
        steps_at_budget = np.searchsorted(row_costs, grid, side="right")
        correct_counts += episodes.preds[i, steps_at_budget] == episodes.labels[i]
    return [
        CurvePoint(x_value=float(b), accuracy=float(c / episodes.n_rows), n_samples=episodes.n_rows)
        for b, c in zip(grid, correct_counts)
    ]


def build_heatmap(episodes: EpisodeSet, sample_indices) -> HeatmapMatrix:
    sample_indices = list(sample_indices)
    if any(i < 0 or i >= episodes.n_rows for i in sample_indices):
        raise ConfigError("heatmap sample index outside the episode set")
    d = episodes.n_features
    matrix = np.zeros((len(sample_indices), d), dtype=np.int32)
    for out_row, i in enumerate(sample_indices):
        for t, feat in enumerate(episodes.order[i]):
            if feat < 0:
                break
            matrix[out_row, feat] = t + 1
    return HeatmapMatrix(matrix=matrix, sample_indices=sample_indices, feature_names=[])


def normalized_cost_auc(curve: list[CurvePoint], total_cost: float) -> float:
    """Exact area under the accuracy step function over [0, total], / total.

    Accuracy at a grid cost holds until the next grid cost, so a curve
    that steps from 0.5 to 1.0 at half the total cost has area 0.75.
    """
    xs = np.asarray([p.x_value for p in curve])
    accs = np.asarray([p.accuracy for p in curve])
    if np.any(np.diff(xs) < 0):
        raise ConfigError("curve grid must be sorted ascending")
    if len(xs) == 0 or xs[0] != 0.0:
        raise ConfigError("cost curve must start at zero cost")
    # running per-row accumulation can drift from sum(costs) by a few ulps
    tol = 1e-9 * max(1.0, abs(total_cost))
    if xs[-1] > total_cost + tol:
        raise ConfigError("curve extends beyond the total cost")
    xs = np.minimum(xs, total_cost)
    edges = np.concatenate([xs, [total_cost]])
    widths = np.diff(edges)
    return float(np.sum(accs * widths) / total_cost)


@dataclass
class BenchConfig:
    model_path: str
    data_path: str
    schema_path: str | None = None
    labels_path: str | None = None
    data_format: str = "tabular"
    policies: tuple[str, ...] = ("aig", "random", "plain_gradient")
    steps_m: int = 50
    budget: float | None = None
    seed: int = 0
    out_dir: str = "bench_out"
    limit_rows: int | None = None
    heatmap_samples: int = 10
    render_plots: bool = True
    dump_trajectories: bool = False
    ig_origin: str = "zeros"
    class_agg: str = "abs_then_sum"
    ig_target: str = "softmax"

    def echo(self) -> dict:
        return asdict(self)


@dataclass
class BenchmarkReport:
    config: BenchConfig
    curves: dict
    heatmaps: dict
    auc: dict
    accuracy_full: dict
    accuracy_step0: dict
    balanced_accuracy_full: float
    n_test_rows: int
    total_cost: float
    schema_hash: str
    episode_sets: dict = field(default_factory=dict, repr=False)
    timings: dict = field(default_factory=dict, repr=False)


def _load_bench_data(cfg: BenchConfig):
    if cfg.data_format == "idx":
        if cfg.labels_path is None:
            raise ConfigError("idx format requires a labels path")
        ds, schema = load_mnist(cfg.data_path, cfg.labels_path)
    elif cfg.data_format == "tabular":
        if cfg.schema_path is None:
            raise ConfigError("tabular format requires a schema path")
        ds, schema = load_tabular(cfg.data_path, cfg.schema_path)
    else:
        raise ConfigError(f"unknown data format {cfg.data_format!r}")
    return ds, schema


def prepare_test_matrix(cfg: BenchConfig, bundle: ModelBundle):
    """Rebuild the exact test split the model was trained against."""
    ds, schema = _load_bench_data(cfg)
    bundle.check_schema(schema)
    _, _, test = split(ds, SplitSpec(seed=bundle.split_seed))
    if cfg.data_format == "tabular":
        test, _ = winsorize_and_scale(test, schema, bounds=bundle.bounds)
    X, y = test.rows, test.labels
    if cfg.limit_rows is not None and cfg.limit_rows < len(X):
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        keep = np.sort(rng.choice(len(X), size=cfg.limit_rows, replace=False))
        X, y = X[keep], y[keep]
    return X, y, schema


def run_benchmark(cfg: BenchConfig) -> BenchmarkReport:
    bundle = load_model(cfg.model_path)
    X, y, schema = prepare_test_matrix(cfg, bundle)
    report = BenchmarkReport(
        config=cfg, curves={}, heatmaps={}, auc={}, accuracy_full={}, accuracy_step0={},
        balanced_accuracy_full=balanced_accuracy(bundle.net, X, y),
        n_test_rows=len(X), total_cost=float(np.sum(schema.costs)), schema_hash=schema.hash(),
    )
    for name in cfg.policies:
        policy = make_policy(
            name, steps=cfg.steps_m, seed=cfg.seed,
            origin=cfg.ig_origin, class_agg=cfg.class_agg, target=cfg.ig_target,
        )
        started = time.monotonic()
        episodes = run_episodes_batch(bundle, schema, policy, X, y, budget=cfg.budget)
        report.timings[name] = time.monotonic() - started
        count_curve = build_count_curve(episodes)
        cost_curve = build_cost_curve(episodes)
        heatmap = build_heatmap(episodes, range(min(cfg.heatmap_samples, episodes.n_rows)))
        heatmap.feature_names = list(schema.feature_names)
        report.curves[name] = {X_AXIS_COUNT: count_curve, X_AXIS_COST: cost_curve}
        report.heatmaps[name] = heatmap
        report.auc[name] = normalized_cost_auc(cost_curve, report.total_cost)
        report.accuracy_full[name] = count_curve[-1].accuracy
        report.accuracy_step0[name] = count_curve[0].accuracy
        report.episode_sets[name] = episodes
    write_report(report)
    return report


def write_report(report: BenchmarkReport):
    out = Path(report.config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "curves.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("policy,x_axis,x_value,accuracy,n\n")
        for policy, axes in report.curves.items():
            for axis, curve in axes.items():
                for p in curve:
                    x = int(p.x_value) if axis == X_AXIS_COUNT else p.x_value
                    fh.write(f"{policy},{axis},{x},{p.accuracy!r},{p.n_samples}\n")
    heat_doc = {name: hm.to_json_dict() for name, hm in report.heatmaps.items()}
    (out / "heatmaps.json").write_text(
        json.dumps(heat_doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )
    summary = {
        "config": report.config.echo(),
        "schema_hash": report.schema_hash,
        "n_test_rows": report.n_test_rows,
        "total_cost": report.total_cost,
        "balanced_accuracy_full": report.balanced_accuracy_full,
        "results": {
            name: {
                "normalized_cost_auc": report.auc[name],
                "accuracy_full": report.accuracy_full[name],
                "accuracy_step0": report.accuracy_step0[name],
            }
            for name in report.curves
        },
    }
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with open(out / "timings.log", "w", encoding="utf-8") as fh:
        for name, seconds in report.timings.items():
            fh.write(f"policy={name} seconds={seconds:.3f}\n")
    if report.config.dump_trajectories:
        _dump_trajectories(report, out)
    if report.config.render_plots:
        from . import plots

        plots.render_report(report, out)


def _dump_trajectories(report: BenchmarkReport, out: Path):
    for name, episodes in report.episode_sets.items():
        with open(out / f"trajectories_{name}.jsonl", "w", encoding="utf-8") as fh:
            for i in range(episodes.n_rows):
                acc_costs = episodes.costs[i]
                for t in range(episodes.n_features + 1):
                    if t > 0 and episodes.order[i, t - 1] < 0:
                        break
                    feature = None if t == 0 else int(episodes.order[i, t - 1])
                    rec = {
                        "row": i,
                        "step": t,
                        "feature": feature,
                        "feature_name": None
                        if feature is None
                        else report.heatmaps[name].feature_names[feature],
                        "cost": 0.0 if t == 0 else float(acc_costs[t - 1] - (acc_costs[t - 2] if t > 1 else 0.0)),
                        "accumulated_cost": 0.0 if t == 0 else float(acc_costs[t - 1]),
                        "score": None,
                        "posterior": None,
                        "predicted_class": int(episodes.preds[i, t]),
                        "label": int(episodes.labels[i]),
                    }
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
