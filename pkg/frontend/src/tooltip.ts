/**
 * Hover hit-testing and tooltip content. Statistics pass through from the
 * report untouched; formatting to 3 decimals happens only at display time.
 */

import { BOX_FILL, PolarLayout, radiusOf, slotAt } from "./layout.js";
import type { ChartState } from "./state.js";
import type { FeatureStats, Report } from "./types.js";

export interface TooltipContent {
  cluster: number;
  feature: string;
  stats: FeatureStats; // verbatim report values
}

/**
 * Return tooltip content when the polar position (theta, r) lies inside a
 * selected violin's box glyph: within the glyph's arc span angularly and
 * between the min/max whisker radii.
 */
export function hover(
  report: Report,
  state: ChartState,
  layout: PolarLayout,
  theta: number,
  r: number,
): TooltipContent | null {
  const slot = slotAt(layout, theta);
  if (!slot || !state.selected.includes(slot.cluster)) return null;
  const cluster = report.clusters.find((c) => c.id === slot.cluster);
  if (!cluster) return null;
  const stats = cluster.stats[slot.feature];
  if (!stats) return null;
  const half = (slot.width * BOX_FILL) / 2;
  let t = theta % (2 * Math.PI);
  if (t < 0) t += 2 * Math.PI;
  if (Math.abs(t - slot.thetaCenter) > half) return null;
  if (r < radiusOf(stats.min) || r > radiusOf(stats.max)) return null;
  return { cluster: slot.cluster, feature: slot.feature, stats };
}

/** "min / q1 / median / q3 / max" rendered to exactly 3 decimals. */
export function formatStats(stats: FeatureStats): string {
  return [stats.min, stats.q1, stats.median, stats.q3, stats.max]
    .map((v) => v.toFixed(3))
    .join(" / ");
}

export function tooltipText(content: TooltipContent): string {
  return `cluster ${content.cluster} - ${content.feature}\n${formatStats(content.stats)}`;
}
