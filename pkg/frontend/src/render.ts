/**
 * Pure scene construction: same (report, state) always yields an identical
 * scene graph.
 *
 * Per (feature, selected cluster) slot: a violin (density mirrored about
 * the slot's angular center, tangential width proportional to density,
 * radial position = normalized value) filled with the cluster color, under
 * a polar box glyph: arcs at the q1/median/q3 radii plus a radial whisker
 * from min to max. In polar coordinates the q3 arc is naturally longer
 * than the q1 arc. Radar axes run through the sector centers.
 */

import {
  axisAngle,
  BOX_FILL,
  computeLayout,
  OUTER_RADIUS,
  PolarLayout,
  radiusOf,
  VIOLIN_FILL,
  ViolinSlot,
} from "./layout.js";
import { node, SceneNode } from "./scene.js";
import type { ChartState } from "./state.js";
import type { FeatureStats, Report } from "./types.js";

const CANVAS = 2 * (OUTER_RADIUS + 60);
const CENTER = CANVAS / 2;

function fmt(value: number): string {
  // trim float noise while keeping scenes deterministic
  return value.toFixed(4);
}

export function toXY(theta: number, r: number): [number, number] {
  // angle 0 points up, increasing clockwise
  return [CENTER + r * Math.sin(theta), CENTER - r * Math.cos(theta)];
}

function polarPoint(theta: number, r: number): string {
  const [x, y] = toXY(theta, r);
  return `${fmt(x)},${fmt(y)}`;
}

function violinPath(slot: ViolinSlot, curve: Array<[number, number]>): string {
  const maxDensity = curve.reduce((m, [, v]) => Math.max(m, v), 0);
  const halfSlot = (slot.width * VIOLIN_FILL) / 2;
  const left: string[] = [];
  const right: string[] = [];
  for (const [pos, value] of curve) {
    const hw = maxDensity > 0 ? (value / maxDensity) * halfSlot : 0;
    const r = radiusOf(pos);
    left.push(polarPoint(slot.thetaCenter - hw, r));
    right.push(polarPoint(slot.thetaCenter + hw, r));
  }
  const outline = [...left, ...right.reverse()];
  return `M${outline.join("L")}Z`;
}

function arcPath(theta0: number, theta1: number, r: number): string {
  const sweep = theta1 - theta0;
  const large = sweep > Math.PI ? 1 : 0;
  return (
    `M${polarPoint(theta0, r)}` +
    `A${fmt(r)},${fmt(r)} 0 ${large} 1 ${polarPoint(theta1, r)}`
  );
}

function boxGlyph(slot: ViolinSlot, stats: FeatureStats, color: string): SceneNode {
  const half = (slot.width * BOX_FILL) / 2;
  const t0 = slot.thetaCenter - half;
  const t1 = slot.thetaCenter + half;
  const children: SceneNode[] = [
    node("path", {
      d:
        `M${polarPoint(slot.thetaCenter, radiusOf(stats.min))}` +
        `L${polarPoint(slot.thetaCenter, radiusOf(stats.max))}`,
      class: "whisker",
      stroke: color,
      fill: "none",
    }),
  ];
  for (const [name, value] of [
    ["q1", stats.q1],
    ["median", stats.median],
    ["q3", stats.q3],
  ] as const) {
    children.push(
      node("path", {
        d: arcPath(t0, t1, radiusOf(value)),
        class: `box-${name}`,
        stroke: color,
        fill: "none",
        "stroke-width": name === "median" ? "3" : "1.5",
      }),
    );
  }
  return node("g", { class: "box-glyph" }, children);
}

function renderSlot(report: Report, slot: ViolinSlot, color: string, hovered: boolean): SceneNode {
  const cluster = report.clusters.find((c) => c.id === slot.cluster);
  const children: SceneNode[] = [];
  if (cluster && cluster.size > 0) {
    const curve = cluster.density[slot.feature] ?? [];
    const stats = cluster.stats[slot.feature];
    if (curve.length > 0) {
      children.push(
        node("path", {
          d: violinPath(slot, curve),
          class: "violin",
          fill: color,
          "fill-opacity": hovered ? "0.85" : "0.6",
          stroke: color,
        }),
      );
    }
    if (stats) {
      children.push(boxGlyph(slot, stats, "#222222"));
    }
  }
  return node(
    "g",
    {
      class: "slot",
      "data-cluster": String(slot.cluster),
      "data-feature": slot.feature,
    },
    children,
  );
}

function axes(report: Report): SceneNode {
  const f = report.features.length;
  const children: SceneNode[] = [];
  report.features.forEach((feature, fi) => {
    const theta = axisAngle(fi, f);
    const [x1, y1] = toXY(theta, 0);
    const [x2, y2] = toXY(theta, OUTER_RADIUS);
    children.push(
      node("path", {
        d: `M${fmt(x1)},${fmt(y1)}L${fmt(x2)},${fmt(y2)}`,
        class: "axis",
        stroke: "#bbbbbb",
        "stroke-dasharray": "4 3",
        fill: "none",
      }),
    );
    const [lx, ly] = toXY(theta, OUTER_RADIUS + 24);
    children.push(
      node(
        "text",
        {
          x: fmt(lx),
          y: fmt(ly),
          class: "axis-label",
          "text-anchor": "middle",
          "dominant-baseline": "middle",
        },
        [],
        feature,
      ),
    );
  });
  // reference rings at value 0 and 1
  for (const value of [0, 1]) {
    children.push(
      node("circle", {
        cx: fmt(CENTER),
        cy: fmt(CENTER),
        r: fmt(radiusOf(value)),
        class: "ring",
        stroke: "#dddddd",
        fill: "none",
      }),
    );
  }
  return node("g", { class: "axes" }, children);
}

export interface Scene {
  layout: PolarLayout;
  svg: SceneNode;
}

/** Build the full SVG scene for the current selection. */
export function render(report: Report, state: ChartState): Scene {
  const layout = computeLayout(report.features, state.selected);
  const slots = layout.slots.map((slot) =>
    renderSlot(
      report,
      slot,
      state.colors[slot.cluster] ?? "#999999",
      state.hover !== null &&
        state.hover.cluster === slot.cluster &&
        state.hover.feature === slot.feature,
    ),
  );
  const svg = node(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      viewBox: `0 0 ${CANVAS} ${CANVAS}`,
      class: "radar-violin",
    },
    [axes(report), node("g", { class: "violins" }, slots)],
  );
  return { layout, svg };
}

export { CANVAS, CENTER };
