// Wiring: every user action round-trips through the service, then the
// view re-renders from a fresh server snapshot (no optimistic updates).

import { AcquisitionClient, ApiError } from "./api.js";
import { rawToUnit } from "./convert.js";
import { renderSessionView } from "./view.js";
import type { SchemaSummary, Suggestion } from "./types.js";

export class ConsoleApp {
  client: AcquisitionClient;
  container: HTMLElement;
  sessionId: string | null = null;
  schema: SchemaSummary | null = null;
  suggestion: Suggestion | null = null;

  constructor(container: HTMLElement, baseUrl: string) {
    this.container = container;
    this.client = new AcquisitionClient(baseUrl);
  }

  async start(modelTag: string, policy = "aig", budget: number | null = null): Promise<void> {
    const created = await this.client.createSession(modelTag, policy, budget);
    this.sessionId = created.session_id;
    this.schema = created.schema;
    this.suggestion = created.suggestion;
    await this.refresh();
  }

  async resume(sessionId: string, schema: SchemaSummary): Promise<void> {
    // reload mid-session: the view is rebuilt purely from GET state
    this.sessionId = sessionId;
    this.schema = schema;
    this.suggestion = null;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (this.sessionId === null || this.schema === null) return;
    const state = await this.client.getState(this.sessionId);
    renderSessionView(this.container, state, this.schema, this.suggestion);
    this.bindEntryForm();
  }

  async submitRaw(featureIndex: number, rawValue: number): Promise<void> {
    if (this.sessionId === null || this.schema === null) {
      throw new Error("no active session");
    }
    const meta = this.schema.features[featureIndex];
    const unit = rawToUnit(meta, rawValue);
    const resp = await this.client.submitFeature(this.sessionId, featureIndex, unit);
    this.suggestion = resp.next_suggestion;
    await this.refresh();
  }

  private bindEntryForm(): void {
    const button = this.container.querySelector<HTMLButtonElement>("#submit-value");
    const picker = this.container.querySelector<HTMLSelectElement>("#feature-picker");
    const input = this.container.querySelector<HTMLInputElement>("#value-input");
    const warning = this.container.querySelector<HTMLElement>("#entry-warning");
    if (!button || !picker || !input || !warning) return;
    button.addEventListener("click", async () => {
      warning.textContent = "";
      const featureIndex = Number(picker.value);
      const rawValue = Number(input.value);
      try {
        await this.submitRaw(featureIndex, rawValue);
      } catch (err) {
        // 409/422 and validation problems surface inline; entered data stays
        warning.textContent = err instanceof ApiError
          ? `${err.status}: ${err.message}`
          : String(err);
      }
    });
  }
}

export async function boot(): Promise<void> {
  const container = document.getElementById("session-view");
  const modelSelect = document.getElementById("model-select") as HTMLSelectElement | null;
  const startButton = document.getElementById("start-session") as HTMLButtonElement | null;
  const budgetInput = document.getElementById("budget-input") as HTMLInputElement | null;
  const policySelect = document.getElementById("policy-select") as HTMLSelectElement | null;
  if (!container || !modelSelect || !startButton) return;
  const baseUrl = (window as { FEATACQ_API?: string }).FEATACQ_API ?? "http://127.0.0.1:8000";
  const app = new ConsoleApp(container, baseUrl);
  const models = await app.client.listModels();
  for (const model of models) {
    const option = document.createElement("option");
    option.value = model.model_tag;
    option.textContent = `${model.model_tag} (${model.feature_count} features, ${model.class_count} classes)`;
    modelSelect.appendChild(option);
  }
  startButton.addEventListener("click", async () => {
    const budget = budgetInput && budgetInput.value !== "" ? Number(budgetInput.value) : null;
    await app.start(modelSelect.value, policySelect?.value ?? "aig", budget);
  });
}

if (typeof document !== "undefined" && document.getElementById("session-view")) {
  void boot();
}
