import { describe, expect, it } from "vitest";

import { axisAngle, computeLayout, radiusOf, slotAt, TWO_PI } from "../src/layout.js";

const FEATURES6 = ["f0", "f1", "f2", "f3", "f4", "f5"];

describe("computeLayout", () => {
  it("gives every violin angular width 2*pi/(F*C)", () => {
    for (const selected of [[0], [0, 1], [0, 1, 2, 3, 4]]) {
      const layout = computeLayout(FEATURES6, selected);
      const expected = TWO_PI / (6 * selected.length);
      expect(layout.slots).toHaveLength(6 * selected.length);
      for (const slot of layout.slots) {
        expect(Math.abs(slot.width - expected)).toBeLessThanOrEqual(1e-9);
        expect(Math.abs(slot.theta1 - slot.theta0 - expected)).toBeLessThanOrEqual(1e-9);
      }
    }
  });

  it("slot widths sum to 2*pi", () => {
    for (const featureCount of [1, 3, 6, 9]) {
      const features = Array.from({ length: featureCount }, (_, i) => `f${i}`);
      for (const clusterCount of [1, 2, 5]) {
        const selected = Array.from({ length: clusterCount }, (_, i) => i);
        const layout = computeLayout(features, selected);
        const total = layout.slots.reduce((sum, slot) => sum + slot.width, 0);
        expect(Math.abs(total - TWO_PI)).toBeLessThanOrEqual(1e-9);
      }
    }
  });

  it("going from 5 selected clusters to 2 widens each violin by exactly 2.5x", () => {
    const five = computeLayout(FEATURES6, [0, 1, 2, 3, 4]);
    const two = computeLayout(FEATURES6, [0, 4]);
    const ratio = two.violinWidth / five.violinWidth;
    expect(Math.abs(ratio - 2.5)).toBeLessThanOrEqual(1e-9);
  });

  it("arranges clusters along each feature arc in ascending id order", () => {
    const layout = computeLayout(FEATURES6, [4, 0, 2]);
    expect(layout.selected).toEqual([0, 2, 4]);
    const sector = layout.slots.filter((s) => s.featureIndex === 1);
    expect(sector.map((s) => s.cluster)).toEqual([0, 2, 4]);
    for (let i = 1; i < sector.length; i++) {
      expect(sector[i]!.theta0).toBeGreaterThan(sector[i - 1]!.theta0);
    }
  });

  it("slots do not overlap and tile the circle", () => {
    const layout = computeLayout(FEATURES6, [0, 1, 2]);
    const sorted = [...layout.slots].sort((a, b) => a.theta0 - b.theta0);
    expect(sorted[0]!.theta0).toBeCloseTo(0, 12);
    for (let i = 1; i < sorted.length; i++) {
      expect(Math.abs(sorted[i]!.theta0 - sorted[i - 1]!.theta1)).toBeLessThanOrEqual(1e-9);
    }
    expect(sorted[sorted.length - 1]!.theta1).toBeCloseTo(TWO_PI, 9);
  });

  it("maps values radially between inner and outer radius", () => {
    const layout = computeLayout(FEATURES6, [0]);
    expect(radiusOf(0)).toBeCloseTo(layout.innerRadius, 12);
    expect(radiusOf(1)).toBeCloseTo(layout.outerRadius, 12);
    expect(radiusOf(0.5)).toBeGreaterThan(layout.innerRadius);
    expect(radiusOf(0.5)).toBeLessThan(layout.outerRadius);
  });

  it("radar axes pass through sector centers", () => {
    expect(axisAngle(0, 6)).toBeCloseTo(TWO_PI / 12, 12);
    expect(axisAngle(3, 6)).toBeCloseTo((TWO_PI * 3.5) / 6, 12);
  });

  it("slotAt finds the slot containing an angle", () => {
    const layout = computeLayout(FEATURES6, [0, 1]);
    for (const slot of layout.slots) {
      const hit = slotAt(layout, slot.thetaCenter);
      expect(hit).not.toBeNull();
      expect(hit!.cluster).toBe(slot.cluster);
      expect(hit!.feature).toBe(slot.feature);
    }
    expect(slotAt(layout, slot0(layout).thetaCenter + TWO_PI)).not.toBeNull();
  });
});

function slot0(layout: ReturnType<typeof computeLayout>) {
  return layout.slots[0]!;
}
