// Builds the end-to-end fixture once: a small thyroid-like dataset and a
// quickly trained model the real acquisition service can load.

import { execFileSync } from "node:child_process";
import { cpSync, existsSync, mkdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
export const FIXTURE_DIR = join(here, "..", ".fixture");

export default function setup(): void {
  const modelPath = join(FIXTURE_DIR, "models", "thyroid.model.json");
  if (existsSync(modelPath)) return;
  mkdirSync(join(FIXTURE_DIR, "data"), { recursive: true });
  mkdirSync(join(FIXTURE_DIR, "models"), { recursive: true });
  const run = (args: string[]) =>
    execFileSync("python3", ["-m", "featacq.cli", ...args], { stdio: "inherit" });
  run(["demo-data", "thyroid", "--out", join(FIXTURE_DIR, "data"), "--n", "1500", "--seed", "0"]);
  run([
    "train",
    "--data", join(FIXTURE_DIR, "data", "thyroid.csv"),
    "--schema", join(FIXTURE_DIR, "data", "thyroid.schema.json"),
    "--out-model", modelPath,
    "--seed", "0", "--epochs", "12",
  ]);
  cpSync(
    join(FIXTURE_DIR, "data", "thyroid.schema.json"),
    join(FIXTURE_DIR, "models", "thyroid.schema.json"),
  );
}
