/**
 * Polar layout: feature f of F owns the sector [2πf/F, 2π(f+1)/F), split
 * equally among the C selected clusters in ascending cluster-id order, so
 * every violin slot has angular width exactly 2π/(F·C). Values map
 * radially from the inner radius (15% of outer, keeping the pole legible)
 * to the outer radius.
 */

export const TWO_PI = Math.PI * 2;
export const OUTER_RADIUS = 300;
export const INNER_RADIUS = 0.15 * OUTER_RADIUS;

/** Fraction of its slot a violin's widest point may fill. */
export const VIOLIN_FILL = 0.8;
/** Fraction of the slot spanned by box-glyph arcs. */
export const BOX_FILL = 0.5;

export interface ViolinSlot {
  feature: string;
  featureIndex: number;
  cluster: number;
  clusterSlot: number; // rank of the cluster among selected
  theta0: number;
  theta1: number;
  thetaCenter: number;
  width: number;
}

export interface PolarLayout {
  features: string[];
  selected: number[]; // ascending cluster ids
  violinWidth: number; // 2π/(F·C)
  slots: ViolinSlot[];
  innerRadius: number;
  outerRadius: number;
}

/** Radial position of a normalized value in [0, 1]. */
export function radiusOf(value: number): number {
  return INNER_RADIUS + value * (OUTER_RADIUS - INNER_RADIUS);
}

export function computeLayout(features: string[], selected: number[]): PolarLayout {
  if (features.length === 0) throw new Error("no features to lay out");
  if (selected.length === 0) throw new Error("at least one cluster must stay selected");
  const ordered = [...selected].sort((a, b) => a - b);
  const f = features.length;
  const c = ordered.length;
  const sector = TWO_PI / f;
  const width = TWO_PI / (f * c);
  const slots: ViolinSlot[] = [];
  features.forEach((feature, fi) => {
    ordered.forEach((cluster, ci) => {
      const theta0 = fi * sector + ci * width;
      const theta1 = theta0 + width;
      slots.push({
        feature,
        featureIndex: fi,
        cluster,
        clusterSlot: ci,
        theta0,
        theta1,
        thetaCenter: (theta0 + theta1) / 2,
        width,
      });
    });
  });
  return {
    features,
    selected: ordered,
    violinWidth: width,
    slots,
    innerRadius: INNER_RADIUS,
    outerRadius: OUTER_RADIUS,
  };
}

/** Angle of feature f's radar axis: the center of its sector. */
export function axisAngle(featureIndex: number, featureCount: number): number {
  return (featureIndex + 0.5) * (TWO_PI / featureCount);
}

/** Locate the slot containing the angle, if any. */
export function slotAt(layout: PolarLayout, theta: number): ViolinSlot | null {
  let t = theta % TWO_PI;
  if (t < 0) t += TWO_PI;
  for (const slot of layout.slots) {
    if (t >= slot.theta0 && t < slot.theta1) return slot;
  }
  return null;
}
