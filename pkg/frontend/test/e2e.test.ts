// @vitest-environment jsdom
// Scripted browser session against the real service: the UI's rendered
// history must match the server's trajectory export field for field.

import { spawn, type ChildProcess } from "node:child_process";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleApp } from "../src/app.js";
import { unitToRaw } from "../src/convert.js";

const here = dirname(fileURLToPath(import.meta.url));
const MODEL_DIR = join(here, "..", ".fixture", "models");
const PORT = 8973;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 60_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/v1/models`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "featacq.cli", "serve", "--model-dir", MODEL_DIR, "--addr", `127.0.0.1:${PORT}`],
    { stdio: "ignore" },
  );
  await waitForServer();
});

afterAll(() => {
  server?.kill();
});

describe("end-to-end session", () => {
  it("runs a seven-step session with one override and matches the export", async () => {
    document.body.innerHTML = '<div id="root"></div>';
    const app = new ConsoleApp(document.getElementById("root")!, BASE);
    await app.start("thyroid", "aig");
    const schema = app.schema!;

    expect(schema.feature_count).toBe(21);
    expect(schema.class_names).toHaveLength(3);
    expect(
      document.querySelectorAll("#posterior-panel .prob-row"),
    ).toHaveLength(3);
    expect(
      document.querySelectorAll("#feature-picker option"),
    ).toHaveLength(21);

    const submitted: number[] = [];
    for (let step = 0; step < 7; step++) {
      let featureIndex: number;
      if (step === 3) {
        // physician override: deliberately not the suggestion
        const suggested = app.suggestion?.feature_index;
        featureIndex = schema.features
          .map((f) => f.index)
          .find((i) => !submitted.includes(i) && i !== suggested)!;
      } else {
        featureIndex = app.suggestion!.feature_index;
      }
      const meta = schema.features[featureIndex];
      const raw = meta.kind === "binary" ? 1 : unitToRaw(meta, 0.37);
      await app.submitRaw(featureIndex, raw);
      submitted.push(featureIndex);
    }

    const cards = Array.from(document.querySelectorAll<HTMLElement>(".history-card"));
    expect(cards).toHaveLength(7);
    expect(cards.map((c) => Number(c.dataset.featureIndex))).toEqual(submitted);

    const exported = await app.client.exportTrajectory(app.sessionId!);
    expect(exported).toHaveLength(8); // step-0 record plus seven acquisitions
    for (let i = 0; i < 7; i++) {
      const record = exported[i + 1];
      const card = cards[i];
      expect(Number(card.dataset.step)).toBe(record.step);
      expect(Number(card.dataset.featureIndex)).toBe(record.feature);
      expect(card.dataset.featureName).toBe(record.feature_name);
      expect(JSON.parse(card.dataset.cost!)).toBe(record.cost);
      expect(JSON.parse(card.dataset.accumulatedCost!)).toBe(record.accumulated_cost);
      expect(Number(card.dataset.predictedClass)).toBe(record.predicted_class);
      expect(JSON.parse(card.dataset.posterior!)).toEqual(record.posterior);
      expect(JSON.parse(card.dataset.score!)).toEqual(record.score);
    }

    // entering the population mean for a fresh feature leaves the
    // rendered posterior panel unchanged (imputation identity)
    const untouched = schema.features.find((f) => !submitted.includes(f.index))!;
    const before = document.getElementById("posterior-panel")!.innerHTML;
    await app.submitRaw(untouched.index, unitToRaw(untouched, untouched.baseline));
    const after = document.getElementById("posterior-panel")!.innerHTML;
    expect(after).toBe(before);
  });

  it("rebuilds the view from a bare state fetch after a reload", async () => {
    document.body.innerHTML = '<div id="root"></div>';
    const app = new ConsoleApp(document.getElementById("root")!, BASE);
    await app.start("thyroid", "aig");
    const meta = app.schema!.features[app.suggestion!.feature_index];
    await app.submitRaw(meta.index, meta.kind === "binary" ? 0 : unitToRaw(meta, 0.6));
    const sessionId = app.sessionId!;
    const schema = app.schema!;

    document.body.innerHTML = '<div id="root"></div>'; // simulated reload
    const fresh = new ConsoleApp(document.getElementById("root")!, BASE);
    await fresh.resume(sessionId, schema);
    const cards = document.querySelectorAll(".history-card");
    expect(cards).toHaveLength(1);
    expect((cards[0] as HTMLElement).dataset.featureIndex).toBe(String(meta.index));
  });

  it("surfaces conflict errors inline without losing the session", async () => {
    document.body.innerHTML = '<div id="root"></div>';
    const app = new ConsoleApp(document.getElementById("root")!, BASE);
    await app.start("thyroid", "aig");
    const meta = app.schema!.features[0];
    await app.submitRaw(0, meta.kind === "binary" ? 1 : 42);
    await expect(app.submitRaw(0, 1)).rejects.toMatchObject({ status: 409 });
    await app.refresh();
    expect(document.querySelectorAll(".history-card")).toHaveLength(1);
  });
});
