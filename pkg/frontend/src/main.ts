// DOM wiring: two synchronized canvases, rank buttons, weight bars, trace.

import { ApiClient } from "./api";
import { hitWaypoint, buildViews, drawSceneView, drawScoreTrace, drawWeightBars, rankColor } from "./render";
import type { Viewport } from "./projection";
import { ViewModel } from "./viewmodel";

const client = new ApiClient("");
const vm = new ViewModel(client);

const topCanvas = document.getElementById("view-top") as HTMLCanvasElement;
const sideCanvas = document.getElementById("view-side") as HTMLCanvasElement;
const barsCanvas = document.getElementById("weight-bars") as HTMLCanvasElement;
const traceCanvas = document.getElementById("score-trace") as HTMLCanvasElement;
const rankButtons = document.getElementById("rank-buttons") as HTMLDivElement;
const iterationLabel = document.getElementById("iteration") as HTMLSpanElement;
const toastBox = document.getElementById("toast") as HTMLDivElement;
const newSessionBtn = document.getElementById("new-session") as HTMLButtonElement;
const seedInput = document.getElementById("seed") as HTMLInputElement;
const familySelect = document.getElementById("family") as HTMLSelectElement;

let views: { top: Viewport; side: Viewport } | null = null;
let drag: { view: Viewport; index: number; canvas: HTMLCanvasElement } | null = null;
let dragPoint: [number, number] | null = null;

function redraw(): void {
  iterationLabel.textContent = String(vm.iteration);
  toastBox.textContent = vm.toast ?? "";
  toastBox.style.display = vm.toast ? "block" : "none";
  document.body.classList.toggle("busy", vm.busy);
  if (!vm.session) return;
  views = buildViews(vm.session.scene, topCanvas.width, topCanvas.height);
  drawSceneView(
    topCanvas.getContext("2d")!,
    vm.session.scene,
    vm.top,
    views.top,
    vm.selectedRank,
  );
  drawSceneView(
    sideCanvas.getContext("2d")!,
    vm.session.scene,
    vm.top,
    views.side,
    vm.selectedRank,
  );
  drawWeightBars(barsCanvas.getContext("2d")!, vm.weightBars, barsCanvas.width, barsCanvas.height);
  drawScoreTrace(traceCanvas.getContext("2d")!, vm.scoreTrace, traceCanvas.width, traceCanvas.height);
  rankButtons.innerHTML = "";
  for (const traj of vm.top) {
    const btn = document.createElement("button");
    btn.textContent = `rank ${traj.rank} (${traj.score.toFixed(3)})`;
    btn.style.borderColor = rankColor(traj.rank);
    btn.disabled = vm.busy;
    btn.title = "click: this one is better than the current top";
    btn.onclick = () => void vm.clickRerank(traj.rank);
    btn.onmouseenter = () => {
      vm.selectedRank = traj.rank;
      redraw();
    };
    rankButtons.appendChild(btn);
  }
}

function canvasPoint(canvas: HTMLCanvasElement, ev: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

function bindDrag(canvas: HTMLCanvasElement, which: "top" | "side"): void {
  canvas.addEventListener("mousedown", (ev) => {
    if (!views || !vm.session || vm.busy) return;
    const view = views[which];
    const pt = canvasPoint(canvas, ev);
    const idx = hitWaypoint(view, vm.session.top[0], pt);
    if (idx !== null) {
      drag = { view, index: idx, canvas };
      dragPoint = pt;
      ev.preventDefault();
    }
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (drag && drag.canvas === canvas) {
      dragPoint = canvasPoint(canvas, ev);
      redraw();
      const ctx = canvas.getContext("2d")!;
      ctx.strokeStyle = "#ff8f00";
      ctx.setLineDash([4, 3]);
      ctx.beginPath();
      ctx.arc(dragPoint[0], dragPoint[1], 6, 0, Math.PI * 2);
      ctx.stroke();
      ctx.setLineDash([]);
    }
  });
  canvas.addEventListener("mouseup", (ev) => {
    if (drag && drag.canvas === canvas) {
      const pt = canvasPoint(canvas, ev);
      const { view, index } = drag;
      drag = null;
      dragPoint = null;
      // rejected edits leave the state untouched; redraw reverts the drag
      void vm.dragWaypoint(index, pt, view).then(() => redraw());
    }
  });
  canvas.addEventListener("mouseleave", () => {
    drag = null;
    dragPoint = null;
    redraw();
  });
}

bindDrag(topCanvas, "top");
bindDrag(sideCanvas, "side");

newSessionBtn.onclick = () => {
  const seed = Number.parseInt(seedInput.value || "0", 10);
  void vm
    .create({ scenario_seed: seed, seed, family: familySelect.value, k: 5 })
    .then(() => {
      window.location.hash = vm.session ? vm.session.session_id : "";
    });
};

vm.onChange(redraw);

// restore a session from the URL fragment on refresh
const fromHash = window.location.hash.replace("#", "");
if (fromHash) {
  void vm.attach(fromHash).catch(() => {
    window.location.hash = "";
  });
}
