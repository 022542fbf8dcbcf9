/**
 * App controller: turns raw report text into either a renderable view or a
 * visible error, independent of the DOM (so failure behavior is testable).
 */

import { render, Scene } from "./render.js";
import { ChartState, createState, toggleCluster, UnknownClusterError } from "./state.js";
import { parseReport, Report, SchemaError } from "./types.js";

export type View =
  | { kind: "chart"; report: Report; state: ChartState; scene: Scene }
  | { kind: "error"; message: string };

/** Parse + validate + first render; malformed input becomes an error view. */
export function boot(reportText: string): View {
  let report: Report;
  try {
    report = parseReport(reportText);
  } catch (err) {
    if (err instanceof SchemaError) {
      return { kind: "error", message: err.message };
    }
    return { kind: "error", message: `failed to load report: ${(err as Error).message}` };
  }
  const state = createState(report);
  return { kind: "chart", report, state, scene: render(report, state) };
}

/** Apply a cluster toggle; unknown ids leave the view unchanged. */
export function toggle(view: View, id: number): View {
  if (view.kind !== "chart") return view;
  let state: ChartState;
  try {
    state = toggleCluster(view.report, view.state, id);
  } catch (err) {
    if (err instanceof UnknownClusterError) return view;
    throw err;
  }
  if (state === view.state) return view;
  return { ...view, state, scene: render(view.report, state) };
}

/** Replace the state (e.g. hover changes) and re-render. */
export function withState(view: View, state: ChartState): View {
  if (view.kind !== "chart" || state === view.state) return view;
  return { ...view, state, scene: render(view.report, state) };
}
