/** UI wiring: grid canvas with press interaction, live traces, family
 * overlay, and the threshold playground.  All data comes from the HTTP API;
 * this module only renders and forwards pointer events.
 */

import { ApiClient, ApiError, type GateLevels, type LogicReport } from "./api.js";
import { gateName, realizableGates, thresholdGate } from "./gates.js";
import {
  FAMILY_COLORS,
  cellAtPixel,
  cellLabel,
  cellRect,
  type Cell,
} from "./grid.js";
import { SeriesStore } from "./series.js";

const TRACE_WINDOW = 150; // samples kept on screen (30 s at 5 Hz)

type OverlayMode = "families" | "blank";

interface AppState {
  sessionId: string;
  samplePeriodS: number;
  overlay: OverlayMode;
  families: Record<string, string>;
  held: Map<number, Cell>; // pointerId -> cell
  store: SeriesStore;
  logic: LogicReport | null;
  threshold: number;
}

function toast(message: string): void {
  const box = document.getElementById("toast");
  if (!box) return;
  box.textContent = message;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 4000);
}

function drawGrid(canvas: HTMLCanvasElement, state: AppState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  for (let row = 0; row < 16; row++) {
    for (let col = 0; col < 20; col++) {
      const cell = { row, col };
      const rect = cellRect(cell, width, height);
      if (state.overlay === "families") {
        const family = state.families[cellLabel(cell)];
        ctx.fillStyle = family ? (FAMILY_COLORS[family] ?? "#ccc") : "#eee";
        ctx.globalAlpha = 0.55;
        ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
        ctx.globalAlpha = 1.0;
      }
      ctx.strokeStyle = "#999";
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    }
  }
  ctx.lineWidth = 3;
  ctx.strokeStyle = "#111";
  for (const cell of state.held.values()) {
    const rect = cellRect(cell, width, height);
    ctx.strokeRect(rect.x + 2, rect.y + 2, rect.w - 4, rect.h - 4);
  }
  ctx.lineWidth = 1;
}

function drawTrace(canvas: HTMLCanvasElement, state: AppState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const window = state.store.window(TRACE_WINDOW);
  if (window.length < 2) return;
  const series: ["R_ohm" | "X_ohm", string][] = [
    ["R_ohm", "#b2182b"],
    ["X_ohm", "#2166ac"],
  ];
  for (const [key, color] of series) {
    const values = window.map((s) => s[key]);
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    ctx.beginPath();
    window.forEach((sample, i) => {
      const x = (i / (window.length - 1)) * width;
      const y = height - ((sample[key] - lo) / span) * (height - 10) - 5;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = color;
    ctx.stroke();
  }
}

function renderTruthTable(state: AppState): void {
  const box = document.getElementById("truth-table");
  if (!box || !state.logic) return;
  const levels: GateLevels = state.logic.outputs_ohm;
  const table = thresholdGate(levels, state.threshold);
  const name = gateName(table);
  box.innerHTML = `
    <p>T = ${state.threshold.toFixed(2)} &Omega; &rarr; <strong>${name}</strong></p>
    <table>
      <tr><th></th><th>y=0</th><th>y=1</th></tr>
      <tr><th>x=0</th><td>${table[0]}</td><td>${table[1]}</td></tr>
      <tr><th>x=1</th><td>${table[2]}</td><td>${table[3]}</td></tr>
    </table>
    <p>Realizable: ${realizableGates(levels).join(", ")}</p>`;
}

async function startApp(): Promise<void> {
  const api = new ApiClient("");
  const grid = document.getElementById("grid") as HTMLCanvasElement;
  const trace = document.getElementById("trace") as HTMLCanvasElement;
  const slider = document.getElementById("threshold") as HTMLInputElement;
  const overlayToggle = document.getElementById("overlay") as HTMLInputElement;
  const logicButton = document.getElementById("run-logic") as HTMLButtonElement;

  const info = await api.createSession({});
  const familyDoc = await api.families(info.id);
  const state: AppState = {
    sessionId: info.id,
    samplePeriodS: info.samplePeriodS,
    overlay: "families",
    families: familyDoc.families,
    held: new Map(),
    store: new SeriesStore(),
    logic: null,
    threshold: 0.13,
  };

  grid.addEventListener("pointerdown", (event) => {
    const bounds = grid.getBoundingClientRect();
    const cell = cellAtPixel(
      event.clientX - bounds.left,
      event.clientY - bounds.top,
      bounds.width,
      bounds.height,
    );
    if (!cell) return; // outside the overlay: no API call
    state.held.set(event.pointerId, cell);
    drawGrid(grid, state);
    api.press(state.sessionId, cellLabel(cell), "down").catch((error: unknown) => {
      state.held.delete(event.pointerId);
      drawGrid(grid, state);
      toast(error instanceof ApiError ? error.message : String(error));
    });
  });

  const release = (event: PointerEvent) => {
    const cell = state.held.get(event.pointerId);
    if (!cell) return;
    state.held.delete(event.pointerId);
    drawGrid(grid, state);
    api.press(state.sessionId, cellLabel(cell), "up").catch((error: unknown) => {
      toast(error instanceof ApiError ? error.message : String(error));
    });
  };
  grid.addEventListener("pointerup", release);
  grid.addEventListener("pointercancel", release);

  overlayToggle.addEventListener("change", () => {
    state.overlay = overlayToggle.checked ? "families" : "blank";
    drawGrid(grid, state);
  });

  slider.addEventListener("input", () => {
    state.threshold = Number(slider.value);
    renderTruthTable(state);
  });

  logicButton.addEventListener("click", () => {
    logicButton.disabled = true;
    api
      .logic(state.sessionId)
      .then((report) => {
        state.logic = report;
        renderTruthTable(state);
      })
      .catch((error: unknown) => {
        toast(error instanceof ApiError ? error.message : String(error));
      })
      .finally(() => {
        logicButton.disabled = false;
      });
  });

  const poll = async () => {
    try {
      const page = await api.series(state.sessionId, state.store.nextIndex);
      if (state.store.merge(page) > 0) drawTrace(trace, state);
    } catch (error) {
      toast(error instanceof ApiError ? error.message : String(error));
    }
  };
  drawGrid(grid, state);
  setInterval(poll, state.samplePeriodS * 1000);
}

if (typeof document !== "undefined" && document.getElementById("grid")) {
  startApp().catch((error: unknown) => toast(String(error)));
}
