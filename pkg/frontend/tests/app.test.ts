import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { boot, toggle } from "../src/app.js";
import { serialize } from "../src/scene.js";
import { parseReport, SchemaError, validateReport } from "../src/types.js";

const raw = readFileSync(new URL("./fixtures/report.json", import.meta.url), "utf-8");

describe("report validation", () => {
  it("accepts the engine fixture", () => {
    const report = parseReport(raw);
    expect(report.features).toHaveLength(6);
    expect(report.clusters).toHaveLength(5);
  });

  it.each([
    ["not json at all", "{oops"],
    ["root is an array", "[1,2]"],
    ["missing features", JSON.stringify({ normalization: {}, clusters: [] })],
    ["empty features", JSON.stringify({ features: [], normalization: {}, clusters: [] })],
    [
      "missing normalization entry",
      JSON.stringify({ features: ["f"], normalization: {}, clusters: [] }),
    ],
    [
      "no clusters",
      JSON.stringify({ features: ["f"], normalization: { f: { min: 0, max: 1 } }, clusters: [] }),
    ],
    [
      "stats missing a quartile",
      JSON.stringify({
        features: ["f"],
        normalization: { f: { min: 0, max: 1 } },
        clusters: [
          {
            id: 0,
            size: 1,
            stats: { f: { min: 0, q1: 0, median: 0, max: 0 } },
            density: { f: [] },
          },
        ],
      }),
    ],
    [
      "non-numeric density",
      JSON.stringify({
        features: ["f"],
        normalization: { f: { min: 0, max: 1 } },
        clusters: [
          {
            id: 0,
            size: 1,
            stats: { f: { min: 0, q1: 0, median: 0, q3: 0, max: 0 } },
            density: { f: [["x", 1]] },
          },
        ],
      }),
    ],
    [
      "null stats on a nonempty cluster",
      JSON.stringify({
        features: ["f"],
        normalization: { f: { min: 0, max: 1 } },
        clusters: [{ id: 0, size: 3, stats: { f: null }, density: { f: [] } }],
      }),
    ],
  ])("rejects %s with a SchemaError", (_name, text) => {
    expect(() => parseReport(text)).toThrow(SchemaError);
  });

  it("error messages point at the offending path", () => {
    try {
      validateReport({ features: ["f"], normalization: {}, clusters: [] });
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as Error).message).toContain('normalization["f"]');
    }
  });
});

describe("app controller robustness", () => {
  it("boots the fixture into a chart view", () => {
    const view = boot(raw);
    expect(view.kind).toBe("chart");
    if (view.kind === "chart") {
      expect(serialize(view.scene.svg)).toContain("violin");
    }
  });

  it("malformed report yields a visible error view, not an exception", () => {
    for (const bad of ["{broken", "[]", '{"features": []}', ""]) {
      const view = boot(bad);
      expect(view.kind).toBe("error");
      if (view.kind === "error") {
        expect(view.message.length).toBeGreaterThan(0);
      }
    }
  });

  it("error views never carry an empty canvas silently", () => {
    const view = boot("{nope");
    expect(view).not.toHaveProperty("scene");
    expect(view.kind === "error" && view.message).toBeTruthy();
  });

  it("toggling an unknown cluster leaves the view unchanged", () => {
    const view = boot(raw);
    const after = toggle(view, 99);
    expect(after).toBe(view);
  });

  it("toggle re-renders with fewer violins", () => {
    const view = boot(raw);
    const after = toggle(view, 0);
    expect(after.kind).toBe("chart");
    if (after.kind === "chart" && view.kind === "chart") {
      expect(after.state.selected).toEqual([1, 2, 3, 4]);
      expect(serialize(after.scene.svg)).not.toBe(serialize(view.scene.svg));
    }
  });

  it("toggling the last selected cluster is a no-op view", () => {
    let view = boot(raw);
    for (const id of [0, 1, 2, 3]) view = toggle(view, id);
    const same = toggle(view, 4);
    expect(same).toBe(view);
  });
});
