/** DOM bootstrap: fetch the report, wire checkboxes, hover, and rendering. */

import { boot, toggle, View, withState } from "./app.js";
import { CANVAS, CENTER } from "./render.js";
import { serialize } from "./scene.js";
import { setHover } from "./state.js";
import { hover, tooltipText } from "./tooltip.js";

const chartEl = document.getElementById("chart") as HTMLDivElement;
const controlsEl = document.getElementById("controls") as HTMLDivElement;
const tooltipEl = document.getElementById("tooltip") as HTMLDivElement;
const errorEl = document.getElementById("error") as HTMLDivElement;

let view: View = { kind: "error", message: "loading report..." };

function apply(next: View): void {
  view = next;
  if (view.kind === "error") {
    errorEl.textContent = view.message;
    errorEl.style.display = "block";
    chartEl.innerHTML = "";
    controlsEl.innerHTML = "";
    return;
  }
  errorEl.style.display = "none";
  chartEl.innerHTML = serialize(view.scene.svg);
  renderControls();
}

function renderControls(): void {
  if (view.kind !== "chart") return;
  const { report, state } = view;
  controlsEl.innerHTML = "";
  for (const cluster of [...report.clusters].sort((a, b) => a.id - b.id)) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.selected.includes(cluster.id);
    box.addEventListener("change", () => apply(toggle(view, cluster.id)));
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = state.colors[cluster.id] ?? "#999";
    label.append(box, swatch, `cluster ${cluster.id} (${cluster.size})`);
    controlsEl.append(label);
  }
}

function pointerPolar(event: MouseEvent): { theta: number; r: number } | null {
  const svg = chartEl.querySelector("svg");
  if (!svg) return null;
  const rect = svg.getBoundingClientRect();
  const scale = CANVAS / Math.min(rect.width, rect.height);
  const x = (event.clientX - rect.left) * scale - CENTER;
  const y = (event.clientY - rect.top) * scale - CENTER;
  const r = Math.hypot(x, y);
  let theta = Math.atan2(x, -y); // 0 at 12 o'clock, clockwise
  if (theta < 0) theta += 2 * Math.PI;
  return { theta, r };
}

chartEl.addEventListener("mousemove", (event) => {
  if (view.kind !== "chart") return;
  const polar = pointerPolar(event);
  const target = polar
    ? hover(view.report, view.state, view.scene.layout, polar.theta, polar.r)
    : null;
  const nextState = setHover(view.state, target && { cluster: target.cluster, feature: target.feature });
  if (nextState !== view.state) apply(withState(view, nextState));
  if (target) {
    tooltipEl.textContent = tooltipText(target);
    tooltipEl.style.display = "block";
    tooltipEl.style.left = `${event.clientX + 14}px`;
    tooltipEl.style.top = `${event.clientY - 10}px`;
  } else {
    tooltipEl.style.display = "none";
  }
});

chartEl.addEventListener("mouseleave", () => {
  tooltipEl.style.display = "none";
  if (view.kind === "chart") apply(withState(view, setHover(view.state, null)));
});

async function load(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const url = params.get("report") ?? "/reports/report.json";
  try {
    const response = await fetch(url);
    if (!response.ok) {
      apply({ kind: "error", message: `failed to fetch ${url}: HTTP ${response.status}` });
      return;
    }
    apply(boot(await response.text()));
  } catch (err) {
    apply({ kind: "error", message: `failed to fetch ${url}: ${(err as Error).message}` });
  }
}

void load();
