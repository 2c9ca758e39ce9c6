// Pure DOM rendering from the latest server snapshot. The server is the
// source of truth: nothing here computes probabilities or costs, it only
// lays out what the last response said. Machine-readable values ride on
// data-* attributes so scripted tests can compare them exactly.

import { formatRaw } from "./convert.js";
import type { SchemaSummary, SessionState, Suggestion } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function probabilityBars(posterior: number[], classNames: string[]): HTMLElement {
  const wrap = el("div", "prob-bars");
  wrap.dataset.posterior = JSON.stringify(posterior);
  posterior.forEach((p, i) => {
    const row = el("div", "prob-row");
    row.appendChild(el("span", "prob-label", classNames[i] ?? `class ${i}`));
    const track = el("div", "prob-track");
    const fill = el("div", "prob-fill");
    fill.style.width = `${(p * 100).toFixed(1)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "prob-value", `${(p * 100).toFixed(1)}%`));
    wrap.appendChild(row);
  });
  return wrap;
}

function budgetGauge(state: SessionState): HTMLElement {
  const gauge = el("div", "budget-gauge");
  if (state.budget === null) {
    gauge.appendChild(
      el("span", "budget-text", `spent ${state.accumulated_cost.toFixed(2)} (no budget cap)`),
    );
    return gauge;
  }
  const used = state.budget > 0 ? state.accumulated_cost / state.budget : 1;
  const track = el("div", "budget-track");
  const fill = el("div", "budget-fill");
  fill.style.width = `${Math.min(100, used * 100).toFixed(1)}%`;
  track.appendChild(fill);
  gauge.appendChild(track);
  gauge.appendChild(
    el(
      "span",
      "budget-text",
      `spent ${state.accumulated_cost.toFixed(2)} of ${state.budget.toFixed(2)}`,
    ),
  );
  return gauge;
}

function suggestionCard(suggestion: Suggestion | null, state: SessionState): HTMLElement {
  const card = el("section", "suggestion-card");
  card.appendChild(el("h2", undefined, "Suggested next examination"));
  if (state.status !== "active") {
    const badge = el("span", `status-badge status-${state.status}`,
      state.status === "complete" ? "complete" : "budget exhausted");
    card.appendChild(badge);
    return card;
  }
  if (suggestion === null) return card;
  card.dataset.featureIndex = String(suggestion.feature_index);
  const body = el("div", "suggestion-body");
  body.appendChild(el("strong", "suggestion-name", suggestion.feature_name));
  body.appendChild(el("span", "suggestion-cost", `cost ${suggestion.cost.toFixed(2)}`));
  body.appendChild(el("span", "suggestion-score", `attribution ${suggestion.score.toExponential(2)}`));
  card.appendChild(body);
  return card;
}

function historyList(state: SessionState, schema: SchemaSummary): HTMLElement {
  const list = el("section", "history");
  list.appendChild(el("h2", undefined, "Acquisition history"));
  for (const entry of state.history) {
    const card = el("article", "history-card");
    card.dataset.step = String(entry.step);
    card.dataset.featureIndex = String(entry.feature_index);
    card.dataset.featureName = entry.feature_name;
    card.dataset.value = JSON.stringify(entry.value);
    card.dataset.cost = JSON.stringify(entry.cost);
    card.dataset.accumulatedCost = JSON.stringify(entry.accumulated_cost);
    card.dataset.predictedClass = String(entry.predicted_class);
    card.dataset.posterior = JSON.stringify(entry.posterior);
    card.dataset.score = JSON.stringify(entry.score);
    const meta = schema.features[entry.feature_index];
    card.appendChild(
      el("header", "history-title", `${entry.step}. ${entry.feature_name}`),
    );
    card.appendChild(
      el("span", "history-value", `value ${meta ? formatRaw(meta, entry.value) : entry.value}`),
    );
    card.appendChild(
      el("span", "history-cost", `cost ${entry.cost.toFixed(2)} (total ${entry.accumulated_cost.toFixed(2)})`),
    );
    card.appendChild(probabilityBars(entry.posterior, state.class_names));
    list.appendChild(card);
  }
  return list;
}

function featurePicker(state: SessionState, schema: SchemaSummary): HTMLElement {
  // the override path: any unacquired feature may be chosen instead of
  // the suggestion
  const acquired = new Set(state.history.map((h) => h.feature_index));
  const picker = el("select", "feature-picker") as unknown as HTMLSelectElement;
  picker.id = "feature-picker";
  picker.disabled = state.status !== "active";
  for (const feature of schema.features) {
    if (acquired.has(feature.index)) continue;
    const option = document.createElement("option");
    option.value = String(feature.index);
    option.textContent = `${feature.name} (cost ${feature.cost.toFixed(2)})`;
    picker.appendChild(option);
  }
  return picker;
}

export function renderSessionView(
  container: HTMLElement,
  state: SessionState,
  schema: SchemaSummary,
  suggestion: Suggestion | null,
): void {
  container.innerHTML = "";
  container.dataset.sessionId = state.session_id;
  container.dataset.status = state.status;

  const header = el("header", "session-header");
  header.appendChild(el("h1", undefined, `Session ${state.session_id.slice(0, 8)}`));
  header.appendChild(el("span", "dataset-tag", state.dataset_tag));
  if (state.status !== "active") {
    header.appendChild(
      el("span", `status-badge status-${state.status}`,
        state.status === "complete" ? "complete" : "budget exhausted"),
    );
  }
  container.appendChild(header);

  const posterior = el("section", "posterior-panel");
  posterior.id = "posterior-panel";
  posterior.appendChild(el("h2", undefined, "Current diagnosis posterior"));
  posterior.appendChild(probabilityBars(state.posterior, state.class_names));
  posterior.appendChild(
    el("p", "predicted", `prediction: ${state.class_names[state.predicted_class]}`),
  );
  container.appendChild(posterior);

  container.appendChild(budgetGauge(state));
  container.appendChild(suggestionCard(suggestion, state));

  const entry = el("section", "entry-form");
  entry.appendChild(featurePicker(state, schema));
  const input = el("input") as HTMLInputElement;
  input.id = "value-input";
  input.type = "text";
  input.placeholder = "observed value (clinical units)";
  input.disabled = state.status !== "active";
  entry.appendChild(input);
  const button = el("button", undefined, "Record result");
  button.id = "submit-value";
  (button as HTMLButtonElement).disabled = state.status !== "active";
  entry.appendChild(button);
  const warning = el("p", "entry-warning");
  warning.id = "entry-warning";
  entry.appendChild(warning);
  container.appendChild(entry);

  container.appendChild(historyList(state, schema));
}
