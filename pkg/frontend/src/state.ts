/**
 * Chart state and its transitions. State values are immutable; every
 * transition returns a fresh object (or the same one for no-ops), keeping
 * rendering a pure function of (report, state).
 */

import type { Report } from "./types.js";

// Okabe-Ito colorblind-safe palette; stable cluster id -> color.
export const PALETTE = [
  "#0072B2",
  "#E69F00",
  "#009E73",
  "#CC79A7",
  "#D55E00",
  "#56B4E9",
  "#F0E442",
  "#999999",
] as const;

export interface HoverTarget {
  cluster: number;
  feature: string;
}

export interface ChartState {
  selected: number[]; // ascending cluster ids, never empty
  hover: HoverTarget | null;
  colors: Record<number, string>;
}

export class UnknownClusterError extends Error {
  constructor(id: number) {
    super(`unknown cluster id ${id}`);
    this.name = "UnknownClusterError";
  }
}

export function createState(report: Report): ChartState {
  const ids = report.clusters.map((c) => c.id).sort((a, b) => a - b);
  const colors: Record<number, string> = {};
  ids.forEach((id) => {
    colors[id] = PALETTE[id % PALETTE.length] as string;
  });
  return { selected: ids, hover: null, colors };
}

/**
 * Toggle a cluster's membership. Deselecting the last selected cluster is
 * a no-op (the state is returned unchanged); toggling an id the report
 * does not contain throws UnknownClusterError.
 */
export function toggleCluster(report: Report, state: ChartState, id: number): ChartState {
  if (!report.clusters.some((c) => c.id === id)) {
    throw new UnknownClusterError(id);
  }
  const isSelected = state.selected.includes(id);
  if (isSelected && state.selected.length === 1) {
    return state; // never drop the last cluster
  }
  const selected = isSelected
    ? state.selected.filter((c) => c !== id)
    : [...state.selected, id].sort((a, b) => a - b);
  const hover = state.hover && selected.includes(state.hover.cluster) ? state.hover : null;
  return { ...state, selected, hover };
}

/** Update the hover target; targets outside the selection clear it. */
export function setHover(state: ChartState, target: HoverTarget | null): ChartState {
  if (target && !state.selected.includes(target.cluster)) target = null;
  if (target === state.hover) return state;
  return { ...state, hover: target };
}
