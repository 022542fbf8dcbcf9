/**
 * Report payload types and structural validation.
 *
 * The engine is the single source of truth for every number shown in the
 * UI; validation rejects anything that does not match the report schema
 * with a human-readable SchemaError (surfaced as a visible message).
 */

export interface FeatureStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface ClusterEntry {
  id: number;
  size: number;
  stats: Record<string, FeatureStats | null>;
  density: Record<string, Array<[number, number]>>;
}

export interface Report {
  features: string[];
  normalization: Record<string, { min: number; max: number }>;
  clusters: ClusterEntry[];
}

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

function fail(path: string, expected: string): never {
  throw new SchemaError(`report${path}: expected ${expected}`);
}

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function checkStats(v: unknown, path: string): FeatureStats | null {
  if (v === null) return null;
  if (typeof v !== "object" || Array.isArray(v)) fail(path, "stats object or null");
  const obj = v as Record<string, unknown>;
  for (const key of ["min", "q1", "median", "q3", "max"]) {
    if (!isNumber(obj[key])) fail(`${path}.${key}`, "a finite number");
  }
  return obj as unknown as FeatureStats;
}

function checkDensity(v: unknown, path: string): Array<[number, number]> {
  if (!Array.isArray(v)) fail(path, "an array of [position, value] pairs");
  for (let i = 0; i < v.length; i++) {
    const pair = v[i];
    if (!Array.isArray(pair) || pair.length !== 2 || !isNumber(pair[0]) || !isNumber(pair[1])) {
      fail(`${path}[${i}]`, "a [number, number] pair");
    }
  }
  return v as Array<[number, number]>;
}

/** Validate an already-parsed JSON value as a Report. */
export function validateReport(value: unknown): Report {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    fail("", "a JSON object");
  }
  const root = value as Record<string, unknown>;
  if (!Array.isArray(root.features) || root.features.length === 0) {
    fail(".features", "a nonempty array of feature names");
  }
  const features = root.features as unknown[];
  for (let i = 0; i < features.length; i++) {
    if (typeof features[i] !== "string") fail(`.features[${i}]`, "a string");
  }

  if (typeof root.normalization !== "object" || root.normalization === null) {
    fail(".normalization", "an object");
  }
  const norm = root.normalization as Record<string, unknown>;
  for (const f of features as string[]) {
    const entry = norm[f];
    if (typeof entry !== "object" || entry === null) {
      fail(`.normalization[${JSON.stringify(f)}]`, "an object with min/max");
    }
    const e = entry as Record<string, unknown>;
    if (!isNumber(e.min) || !isNumber(e.max)) {
      fail(`.normalization[${JSON.stringify(f)}]`, "finite min/max numbers");
    }
  }

  if (!Array.isArray(root.clusters)) fail(".clusters", "an array");
  const clusters: ClusterEntry[] = [];
  (root.clusters as unknown[]).forEach((c, i) => {
    if (typeof c !== "object" || c === null) fail(`.clusters[${i}]`, "an object");
    const entry = c as Record<string, unknown>;
    if (!Number.isInteger(entry.id) || (entry.id as number) < 0) {
      fail(`.clusters[${i}].id`, "a nonnegative integer");
    }
    if (!Number.isInteger(entry.size) || (entry.size as number) < 0) {
      fail(`.clusters[${i}].size`, "a nonnegative integer");
    }
    if (typeof entry.stats !== "object" || entry.stats === null) {
      fail(`.clusters[${i}].stats`, "an object");
    }
    if (typeof entry.density !== "object" || entry.density === null) {
      fail(`.clusters[${i}].density`, "an object");
    }
    const stats: Record<string, FeatureStats | null> = {};
    const density: Record<string, Array<[number, number]>> = {};
    for (const f of features as string[]) {
      const sPath = `.clusters[${i}].stats[${JSON.stringify(f)}]`;
      const dPath = `.clusters[${i}].density[${JSON.stringify(f)}]`;
      const sVal = (entry.stats as Record<string, unknown>)[f];
      if (sVal === undefined) fail(sPath, "an entry for every feature");
      stats[f] = checkStats(sVal, sPath);
      const dVal = (entry.density as Record<string, unknown>)[f];
      if (dVal === undefined) fail(dPath, "an entry for every feature");
      density[f] = checkDensity(dVal, dPath);
      if ((entry.size as number) > 0 && stats[f] === null) {
        fail(sPath, "statistics for a nonempty cluster");
      }
    }
    clusters.push({
      id: entry.id as number,
      size: entry.size as number,
      stats,
      density,
    });
  });
  const ids = new Set(clusters.map((c) => c.id));
  if (ids.size !== clusters.length) fail(".clusters", "unique cluster ids");
  if (clusters.length === 0) fail(".clusters", "at least one cluster");
  return { features: features as string[], normalization: norm as Report["normalization"], clusters };
}

/** Parse raw JSON text into a validated Report. */
export function parseReport(text: string): Report {
  let value: unknown;
  try {
    value = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`report is not valid JSON: ${(err as Error).message}`);
  }
  return validateReport(value);
}
