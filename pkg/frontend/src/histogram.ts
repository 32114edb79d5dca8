import { readFileSync } from "node:fs";

/**
 * Hue x saturation occupancy grid as emitted by `prismcloud histogram`.
 * `counts` is row-major: index = hue * sat_bins + sat, saturation growing
 * outward from the grey axis.
 */
export interface ChromaHistogram {
  hue_bins: number;
  sat_bins: number;
  counts: number[];
}

function isPositiveInt(v: unknown): v is number {
  return typeof v === "number" && Number.isInteger(v) && v > 0;
}

export function validateHistogram(data: unknown, source: string): ChromaHistogram {
  if (typeof data !== "object" || data === null) {
    throw new Error(`${source}: expected a JSON object`);
  }
  const h = data as Record<string, unknown>;
  if (!isPositiveInt(h.hue_bins) || !isPositiveInt(h.sat_bins)) {
    throw new Error(`${source}: hue_bins/sat_bins must be positive integers`);
  }
  if (!Array.isArray(h.counts)) {
    throw new Error(`${source}: counts must be an array`);
  }
  const expected = h.hue_bins * h.sat_bins;
  if (h.counts.length !== expected) {
    throw new Error(
      `${source}: counts has ${h.counts.length} entries, expected ` +
      `${h.hue_bins}x${h.sat_bins} = ${expected}`);
  }
  for (const c of h.counts) {
    if (typeof c !== "number" || !Number.isFinite(c) || c < 0) {
      throw new Error(`${source}: counts must be non-negative numbers`);
    }
  }
  return { hue_bins: h.hue_bins, sat_bins: h.sat_bins, counts: h.counts as number[] };
}

export function loadHistogram(path: string): ChromaHistogram {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read ${path}: ${(err as Error).message}`);
  }
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new Error(`${path}: not valid JSON`);
  }
  return validateHistogram(data, path);
}

export function cellCount(h: ChromaHistogram, hue: number, sat: number): number {
  return h.counts[hue * h.sat_bins + sat];
}
