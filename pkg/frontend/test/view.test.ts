// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { renderSessionView } from "../src/view.js";
import type { SchemaSummary, SessionState, Suggestion } from "../src/types.js";

const schema: SchemaSummary = {
  feature_count: 3,
  class_names: ["healthy", "sick"],
  features: [
    { index: 0, name: "age", kind: "real", cost: 1, raw_lower: 10, raw_upper: 90, baseline: 0.5 },
    { index: 1, name: "flag", kind: "binary", cost: 1, raw_lower: 0, raw_upper: 1, baseline: 0.1 },
    { index: 2, name: "lab", kind: "real", cost: 8.5, raw_lower: 0, raw_upper: 4, baseline: 0.4 },
  ],
};

function makeState(overrides: Partial<SessionState> = {}): SessionState {
  return {
    session_id: "abcdef1234567890",
    dataset_tag: "demo",
    status: "active",
    policy: "aig",
    budget: null,
    accumulated_cost: 0,
    remaining_budget: null,
    step: 0,
    posterior: [0.8, 0.2],
    predicted_class: 0,
    class_names: schema.class_names,
    step0_posterior: [0.8, 0.2],
    history: [],
    ...overrides,
  };
}

const suggestion: Suggestion = {
  feature_index: 2,
  feature_name: "lab",
  cost: 8.5,
  score: 0.0123,
};

describe("renderSessionView", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    container = document.getElementById("root")!;
  });

  it("shows the posterior panel with one bar per class", () => {
    renderSessionView(container, makeState(), schema, suggestion);
    const rows = container.querySelectorAll("#posterior-panel .prob-row");
    expect(rows).toHaveLength(2);
    expect(container.querySelector("#posterior-panel")!.textContent).toContain("80.0%");
  });

  it("renders the suggestion card with name, cost and score", () => {
    renderSessionView(container, makeState(), schema, suggestion);
    const card = container.querySelector(".suggestion-card")!;
    expect(card.textContent).toContain("lab");
    expect(card.textContent).toContain("8.50");
    expect((card as HTMLElement).dataset.featureIndex).toBe("2");
  });

  it("renders history cards with exact machine-readable fields", () => {
    const state = makeState({
      step: 1,
      accumulated_cost: 8.5,
      posterior: [0.3, 0.7],
      predicted_class: 1,
      history: [
        {
          step: 1,
          feature_index: 2,
          feature_name: "lab",
          value: 0.75,
          cost: 8.5,
          accumulated_cost: 8.5,
          score: 0.0123,
          posterior: [0.3, 0.7],
          predicted_class: 1,
        },
      ],
    });
    renderSessionView(container, state, schema, null);
    const card = container.querySelector<HTMLElement>(".history-card")!;
    expect(card.dataset.featureName).toBe("lab");
    expect(JSON.parse(card.dataset.value!)).toBe(0.75);
    expect(JSON.parse(card.dataset.posterior!)).toEqual([0.3, 0.7]);
    expect(card.textContent).toContain("3.00"); // 0.75 of [0, 4] in raw units
  });

  it("excludes acquired features from the override picker", () => {
    const state = makeState({
      history: [
        {
          step: 1, feature_index: 0, feature_name: "age", value: 0.5, cost: 1,
          accumulated_cost: 1, score: null, posterior: [0.8, 0.2], predicted_class: 0,
        },
      ],
    });
    renderSessionView(container, state, schema, suggestion);
    const options = Array.from(
      container.querySelectorAll<HTMLOptionElement>("#feature-picker option"),
    ).map((option) => option.value);
    expect(options).toEqual(["1", "2"]);
  });

  it("disables input and shows the badge when the budget is exhausted", () => {
    renderSessionView(container, makeState({ status: "budget_exhausted", budget: 0 }), schema, null);
    expect(container.querySelector<HTMLInputElement>("#value-input")!.disabled).toBe(true);
    expect(container.querySelector<HTMLButtonElement>("#submit-value")!.disabled).toBe(true);
    expect(container.querySelector(".status-badge")!.textContent).toContain("budget");
  });

  it("shows the complete badge once every feature is acquired", () => {
    renderSessionView(container, makeState({ status: "complete" }), schema, null);
    expect(container.textContent).toContain("complete");
  });

  it("is a pure function of the snapshot", () => {
    const state = makeState();
    renderSessionView(container, state, schema, suggestion);
    const first = container.innerHTML;
    renderSessionView(container, state, schema, suggestion);
    expect(container.innerHTML).toBe(first);
  });
});
