"""Sequential acquisition: suggest, acquire, predict, repeat.

A session tracks which features are observed, imputes the rest at the
training means for prediction, and asks its policy to score candidate
features. The batch driver runs many held-out rows in lockstep with the
same arithmetic, which keeps the BLAS calls large.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .attribution import (
    AGG_ABS_THEN_SUM,
    TARGET_SOFTMAX,
    AttributionVector,
    aig_scores_batch,
    plain_gradient_scores_batch,
)
from .data import DatasetSchema
from .errors import BudgetError, ConfigError, DataError, SessionStateError
from .model_io import ModelBundle

STATUS_ACTIVE = "active"
STATUS_COMPLETE = "complete"
STATUS_BUDGET_EXHAUSTED = "budget_exhausted"

ORIGIN_ZEROS = "zeros"  # path starts at the all-absent input (default for acquisition)
ORIGIN_BASELINE = "baseline"  # path starts at the imputation means (diagnostic only)


class AigPolicy:
    """Score candidates by cost-scaled, class-aggregated integrated gradients.

    With `origin="baseline"` the path starts at the imputation means, which
    makes every unobserved feature's attribution identically zero (its
    displacement along the path vanishes) and reduces acquisition to index
    order; that mode exists only to demonstrate the degeneracy. The default
    integrates from the all-zeros input instead.
    """

    tag = "aig"

    def __init__(self, steps: int = 50, origin: str = ORIGIN_ZEROS,
                 class_agg: str = AGG_ABS_THEN_SUM, target: str = TARGET_SOFTMAX):
        if origin not in (ORIGIN_ZEROS, ORIGIN_BASELINE):
            raise ConfigError(f"unknown path origin {origin!r}")
        self.steps = steps
        self.origin = origin
        self.class_agg = class_agg
        self.target = target

    def _origin_vector(self, model: ModelBundle) -> np.ndarray:
        if self.origin == ORIGIN_BASELINE:
            return model.baseline
        return np.zeros(model.input_dim)

    def scores_batch(self, model: ModelBundle, X_obs: np.ndarray, costs: np.ndarray) -> np.ndarray:
        return aig_scores_batch(
            model.net, X_obs, self._origin_vector(model), self.steps, costs,
            self.class_agg, self.target,
        )


class PlainGradientPolicy:
    """Score candidates by the gradient magnitude at the current imputed input."""

    tag = "plain_gradient"

    def __init__(self, target: str = TARGET_SOFTMAX):
        self.target = target

    def scores_batch(self, model: ModelBundle, X_obs: np.ndarray, costs: np.ndarray) -> np.ndarray:
        return plain_gradient_scores_batch(model.net, X_obs, costs, self.target)


class RandomPolicy:
    """Uniformly random candidate order, reproducible per seed."""

    tag = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def scores_batch(self, model: ModelBundle, X_obs: np.ndarray, costs: np.ndarray) -> np.ndarray:
        n, d = np.atleast_2d(X_obs).shape
        # The argmax of i.i.d. uniform scores over any candidate subset is
        # uniform over that subset.
        return self._rng.random((n, d))

    def fresh(self, seed: int) -> "RandomPolicy":
        return RandomPolicy(seed)


def make_policy(name: str, steps: int = 50, seed: int = 0, origin: str = ORIGIN_ZEROS,
                class_agg: str = AGG_ABS_THEN_SUM, target: str = TARGET_SOFTMAX):
    if name == "aig":
        return AigPolicy(steps=steps, origin=origin, class_agg=class_agg, target=target)
    if name == "plain_gradient":
        return PlainGradientPolicy(target=target)
    if name == "random":
        return RandomPolicy(seed=seed)
    raise ConfigError(f"unknown policy {name!r}")


@dataclass
class HistoryEntry:
    step: int
    feature_index: int
    value: float
    cost: float
    accumulated_cost: float
    score: float
    posterior: np.ndarray


@dataclass
class AcquisitionSession:
    """Mutable state of one acquisition episode (single writer)."""

    model: ModelBundle
    schema: DatasetSchema
    policy: object
    budget: float | None = None
    mask: np.ndarray = field(init=False)
    values: np.ndarray = field(init=False)
    accumulated_cost: float = field(default=0.0, init=False)
    history: list[HistoryEntry] = field(default_factory=list, init=False)
    status: str = field(default=STATUS_ACTIVE, init=False)
    step0_posterior: np.ndarray = field(init=False)
    _last_scores: np.ndarray | None = field(default=None, init=False, repr=False)
    _last_scores_step: int = field(default=-1, init=False, repr=False)

    def __post_init__(self):
        d = self.schema.n_features
        if self.model.input_dim != d or self.model.class_count != self.schema.class_count:
            raise ConfigError(
                f"model ({self.model.input_dim} features, {self.model.class_count} classes) "
                f"does not match schema ({d} features, {self.schema.class_count} classes)"
            )
        if self.budget is not None and self.budget < 0:
            raise ConfigError("budget must be nonnegative")
        self.mask = np.zeros(d, dtype=bool)
        self.values = self.model.baseline.copy()
        self.step0_posterior = self.model.net.forward(self.values)
        self._refresh_status()

    # -- bookkeeping -------------------------------------------------------

    @property
    def step(self) -> int:
        return len(self.history)

    def remaining_budget(self) -> float | None:
        if self.budget is None:
            return None
        return self.budget - self.accumulated_cost

    def _affordable(self) -> np.ndarray:
        if self.budget is None:
            return np.ones(self.schema.n_features, dtype=bool)
        return self.schema.costs <= self.remaining_budget()

    def _refresh_status(self):
        if self.mask.all():
            self.status = STATUS_COMPLETE
        elif not np.any(~self.mask & self._affordable()):
            self.status = STATUS_BUDGET_EXHAUSTED
        else:
            self.status = STATUS_ACTIVE

    def posterior(self) -> np.ndarray:
        if self.history:
            return self.history[-1].posterior
        return self.step0_posterior

    def predicted_class(self) -> int:
        return int(np.argmax(self.posterior()))

    # -- operations ---------------------------------------------------------

    def suggest_next(self):
        """Return (feature_index, score) for the best affordable candidate.

        Ties break toward the lowest feature index. Returns None when no
        candidate remains (defensive; a session in that situation is no
        longer active).
        """
        if self.status != STATUS_ACTIVE:
            raise SessionStateError(f"cannot suggest on a {self.status} session")
        scores = self.policy.scores_batch(self.model, self.values[None, :], self.schema.costs)[0]
        vector = AttributionVector(scores=scores, step_index=self.step, policy_tag=self.policy.tag)
        self._last_scores = vector.scores
        self._last_scores_step = self.step
        candidates = ~self.mask & self._affordable()
        if not candidates.any():
            return None
        masked = np.where(candidates, vector.scores, -np.inf)
        best = int(np.argmax(masked))  # argmax takes the first maximum: lowest index wins ties
        return best, float(vector.scores[best])

    def acquire(self, feature_index: int, value: float) -> "AcquisitionSession":
        """Record an observed value, update the posterior, advance the step."""
        if self.status != STATUS_ACTIVE:
            raise SessionStateError(f"cannot acquire on a {self.status} session")
        d = self.schema.n_features
        if not 0 <= feature_index < d:
            raise ConfigError(f"feature index {feature_index} outside [0, {d})")
        if self.mask[feature_index]:
            raise SessionStateError(
                f"feature {self.schema.feature_names[feature_index]!r} was already acquired"
            )
        if not np.isfinite(value):
            raise DataError(f"value for feature {feature_index} is not finite")
        cost = float(self.schema.costs[feature_index])
        remaining = self.remaining_budget()
        if remaining is not None and cost > remaining:
            raise BudgetError(
                f"feature {self.schema.feature_names[feature_index]!r} costs {cost}, "
                f"only {remaining} budget remains",
                remaining=remaining,
            )
        value = float(value)
        if not 0.0 <= value <= 1.0:
            warnings.warn(
                f"value {value} outside the preprocessed domain [0, 1]; clamping", stacklevel=2
            )
            value = min(max(value, 0.0), 1.0)
        score = np.nan
        if self._last_scores_step == self.step and self._last_scores is not None:
            score = float(self._last_scores[feature_index])
        self.mask[feature_index] = True
        self.values[feature_index] = value
        self.accumulated_cost += cost
        posterior = self.model.net.forward(self.values)
        self.history.append(
            HistoryEntry(
                step=self.step + 1,
                feature_index=feature_index,
                value=value,
                cost=cost,
                accumulated_cost=self.accumulated_cost,
                score=score,
                posterior=posterior,
            )
        )
        self._refresh_status()
        return self


def new_session(model: ModelBundle, schema: DatasetSchema, policy, budget: float | None = None):
    """Fresh session: nothing observed, posterior at the imputation means."""
    return AcquisitionSession(model=model, schema=schema, policy=policy, budget=budget)


@dataclass
class TrajectoryStep:
    step: int
    feature: int | None
    feature_name: str | None
    cost: float
    accumulated_cost: float
    score: float
    posterior: np.ndarray | None
    predicted_class: int


@dataclass
class Trajectory:
    """Ordered record of one acquisition episode over one labelled row."""

    steps: list[TrajectoryStep]
    label: int | None
    policy_tag: str

    def feature_order(self) -> list[int]:
        return [s.feature for s in self.steps if s.feature is not None]

    def to_records(self) -> list[dict]:
        out = []
        for s in self.steps:
            rec = {
                "step": s.step,
                "feature": s.feature,
                "feature_name": s.feature_name,
                "cost": s.cost,
                "accumulated_cost": s.accumulated_cost,
                "score": None if np.isnan(s.score) else s.score,
                "posterior": None if s.posterior is None else [float(p) for p in s.posterior],
                "predicted_class": s.predicted_class,
            }
            if self.label is not None:
                rec["label"] = int(self.label)
            out.append(rec)
        return out


def trajectory_from_session(session: AcquisitionSession, label: int | None = None) -> Trajectory:
    steps = [
        TrajectoryStep(
            step=0, feature=None, feature_name=None, cost=0.0, accumulated_cost=0.0,
            score=np.nan, posterior=session.step0_posterior,
            predicted_class=int(np.argmax(session.step0_posterior)),
        )
    ]
    for h in session.history:
        steps.append(
            TrajectoryStep(
                step=h.step,
                feature=h.feature_index,
                feature_name=session.schema.feature_names[h.feature_index],
                cost=h.cost,
                accumulated_cost=h.accumulated_cost,
                score=h.score,
                posterior=h.posterior,
                predicted_class=int(np.argmax(h.posterior)),
            )
        )
    return Trajectory(steps=steps, label=label, policy_tag=session.policy.tag)


def run_episode(
    model: ModelBundle,
    schema: DatasetSchema,
    policy,
    full_row: np.ndarray,
    label: int | None = None,
    budget: float | None = None,
) -> Trajectory:
    """Simulate an episode, answering every suggestion from the held-out row."""
    full_row = np.asarray(full_row, dtype=np.float64)
    session = new_session(model, schema, policy, budget)
    while session.status == STATUS_ACTIVE:
        suggestion = session.suggest_next()
        if suggestion is None:
            break
        feature, _ = suggestion
        session.acquire(feature, float(full_row[feature]))
    return trajectory_from_session(session, label)


@dataclass
class EpisodeSet:
    """Compact arrays describing one policy's episodes over a test matrix.

    order[i, t] is the feature acquired by row i at step t+1 (-1 once the
    row stopped); costs[i, t] is the accumulated cost after that step;
    preds[i, k] is the predicted class after k acquisitions (carried
    forward once a row stops early).
    """

    order: np.ndarray
    costs: np.ndarray
    preds: np.ndarray
    labels: np.ndarray
    policy_tag: str
    total_cost: float
    budget: float | None = None

    @property
    def n_rows(self) -> int:
        return self.order.shape[0]

    @property
    def n_features(self) -> int:
        return self.order.shape[1]

    def steps_taken(self) -> np.ndarray:
        return (self.order >= 0).sum(axis=1)

    @classmethod
    def from_trajectories(cls, trajectories, schema: DatasetSchema, budget=None) -> "EpisodeSet":
        n = len(trajectories)
        d = schema.n_features
        order = np.full((n, d), -1, dtype=np.int32)
        costs = np.full((n, d), np.nan)
        preds = np.zeros((n, d + 1), dtype=np.int32)
        labels = np.zeros(n, dtype=np.int64)
        for i, traj in enumerate(trajectories):
            labels[i] = -1 if traj.label is None else traj.label
            preds[i, 0] = traj.steps[0].predicted_class
            last = traj.steps[0].predicted_class
            t = 0
            for s in traj.steps[1:]:
                order[i, t] = s.feature
                costs[i, t] = s.accumulated_cost
                last = s.predicted_class
                preds[i, t + 1] = last
                t += 1
            preds[i, t + 1 :] = last
        return cls(
            order=order, costs=costs, preds=preds, labels=labels,
            policy_tag=trajectories[0].policy_tag if trajectories else "",
            total_cost=float(np.sum(schema.costs)), budget=budget,
        )


def run_episodes_batch(
    model: ModelBundle,
    schema: DatasetSchema,
    policy,
    X_full: np.ndarray,
    labels: np.ndarray,
    budget: float | None = None,
) -> EpisodeSet:
    """Lockstep batch version of `run_episode` over many rows.

    Produces the same feature orders and predictions as running sessions
    row by row; each step scores all still-running rows with one batched
    policy call.
    """
    X_full = np.asarray(X_full, dtype=np.float64)
    n, d = X_full.shape
    costs_vec = schema.costs
    X_obs = np.tile(model.baseline, (n, 1))
    mask = np.zeros((n, d), dtype=bool)
    acc_cost = np.zeros(n)
    order = np.full((n, d), -1, dtype=np.int32)
    step_costs = np.full((n, d), np.nan)
    preds = np.zeros((n, d + 1), dtype=np.int32)
    preds[:, 0] = model.net.predict_batch(X_obs)
    running = np.ones(n, dtype=bool)

    for t in range(d):
        if budget is not None:
            affordable = ~mask & (costs_vec[None, :] <= (budget - acc_cost)[:, None])
            running &= affordable.any(axis=1)
        if not running.any():
            preds[:, t + 1 :] = preds[:, t : t + 1]
            break
        idx = np.flatnonzero(running)
        scores = policy.scores_batch(model, X_obs[idx], costs_vec)
        candidates = ~mask[idx]
        if budget is not None:
            candidates &= costs_vec[None, :] <= (budget - acc_cost[idx])[:, None]
        scores = np.where(candidates, scores, -np.inf)
        picks = np.argmax(scores, axis=1)
        mask[idx, picks] = True
        X_obs[idx, picks] = X_full[idx, picks]
        acc_cost[idx] += costs_vec[picks]
        order[idx, t] = picks
        step_costs[idx, t] = acc_cost[idx]
        preds[:, t + 1] = preds[:, t]
        preds[idx, t + 1] = model.net.predict_batch(X_obs[idx])
    return EpisodeSet(
        order=order, costs=step_costs, preds=preds,
        labels=np.asarray(labels, dtype=np.int64), policy_tag=policy.tag,
        total_cost=float(np.sum(costs_vec)), budget=budget,
    )
