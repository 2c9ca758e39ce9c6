// Clinicians enter values in raw units; the model speaks [0, 1].
// The schema summary carries the training-time clamp/scale bounds.

import type { FeatureMeta } from "./types.js";

export function rawToUnit(feature: FeatureMeta, raw: number): number {
  if (!Number.isFinite(raw)) {
    throw new Error(`value for ${feature.name} must be a finite number`);
  }
  if (feature.kind === "binary") {
    if (raw !== 0 && raw !== 1) {
      throw new Error(`${feature.name} is a yes/no item; enter 0 or 1`);
    }
    return raw;
  }
  const span = feature.raw_upper - feature.raw_lower;
  if (span <= 0) return 0;
  const clamped = Math.min(Math.max(raw, feature.raw_lower), feature.raw_upper);
  return (clamped - feature.raw_lower) / span;
}

export function unitToRaw(feature: FeatureMeta, unit: number): number {
  if (feature.kind === "binary") return unit;
  return feature.raw_lower + unit * (feature.raw_upper - feature.raw_lower);
}

export function formatRaw(feature: FeatureMeta, unit: number): string {
  const raw = unitToRaw(feature, unit);
  return feature.kind === "binary" ? (unit >= 0.5 ? "yes" : "no") : raw.toFixed(2);
}
