// Canvas drawing for the two scene views, weight bars and score trace.

import { fitViewport, metersPerPixel, Viewport, worldToScreen } from "./projection";
import type { SceneView, TrajectoryView } from "./types";
import type { TracePoint, WeightBar } from "./viewmodel";

const RANK_COLORS = ["#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b"];
const ATTRIBUTE_BADGES: Record<string, string> = {
  heavy: "H",
  fragile: "F",
  sharp: "S",
  hot: "T",
  liquid: "L",
  electronic: "E",
  human: "U",
};

export function rankColor(rank: number): string {
  return RANK_COLORS[(rank - 1) % RANK_COLORS.length];
}

export function drawSceneView(
  ctx: CanvasRenderingContext2D,
  scene: SceneView,
  top: TrajectoryView[],
  view: Viewport,
  selectedRank: number,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, view.width, view.height);

  if (view.kind === "side") {
    const [, ty] = worldToScreen(view, [0, 0, scene.table_height]);
    ctx.strokeStyle = "#8d6e63";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(0, ty);
    ctx.lineTo(view.width, ty);
    ctx.stroke();
  }

  const ia = 0;
  const ib = view.kind === "top" ? 1 : 2;
  for (const obj of scene.objects) {
    const isCarried = obj.id === scene.manipulated_id;
    const [x0, y0] = worldToScreen(view, [
      obj.center[0] - obj.half_extents[0],
      obj.center[1] - obj.half_extents[1],
      obj.center[2] + obj.half_extents[2],
    ]);
    const [x1, y1] = worldToScreen(view, [
      obj.center[0] + obj.half_extents[0],
      obj.center[1] + obj.half_extents[1],
      obj.center[2] - obj.half_extents[2],
    ]);
    ctx.fillStyle = isCarried ? "rgba(255,193,7,0.55)" : "rgba(96,125,139,0.45)";
    ctx.strokeStyle = isCarried ? "#ff8f00" : "#455a64";
    ctx.lineWidth = 1;
    const w = Math.max(2, Math.abs(x1 - x0));
    const h = Math.max(2, Math.abs(y1 - y0));
    const left = Math.min(x0, x1);
    const topPx = Math.min(y0, y1);
    ctx.fillRect(left, topPx, w, h);
    ctx.strokeRect(left, topPx, w, h);
    const badges = scene.attributes
      .filter((_, i) => obj.attributes[i] === 1)
      .map((name) => ATTRIBUTE_BADGES[name] ?? name[0].toUpperCase())
      .join("");
    if (badges) {
      ctx.fillStyle = "#263238";
      ctx.font = "10px monospace";
      ctx.fillText(badges, left + 2, topPx + 10);
    }
    void ia;
    void ib;
  }

  const [gx, gy] = worldToScreen(view, scene.goal);
  ctx.strokeStyle = "#00897b";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(gx, gy, 6, 0, Math.PI * 2);
  ctx.stroke();
  ctx.fillStyle = "#00897b";
  ctx.font = "10px sans-serif";
  ctx.fillText("goal", gx + 8, gy + 3);

  // trajectories drawn back to front so rank 1 paints last
  for (const traj of [...top].reverse()) {
    const color = rankColor(traj.rank);
    ctx.strokeStyle = color;
    ctx.globalAlpha = traj.rank === selectedRank ? 1.0 : 0.55;
    ctx.lineWidth = traj.rank === 1 ? 2.5 : 1.5;
    ctx.beginPath();
    traj.wrist.forEach((p, i) => {
      const [x, y] = worldToScreen(view, p);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.globalAlpha = 1.0;
    const [lx, ly] = worldToScreen(view, traj.wrist[traj.wrist.length - 1]);
    ctx.fillStyle = color;
    ctx.font = "bold 11px sans-serif";
    ctx.fillText(String(traj.rank), lx + 4, ly - 4);
  }

  // draggable waypoint handles on the top trajectory
  const first = top[0];
  if (first) {
    ctx.fillStyle = rankColor(1);
    for (let i = 1; i < first.wrist.length - 1; i += 1) {
      const [x, y] = worldToScreen(view, first.wrist[i]);
      ctx.beginPath();
      ctx.arc(x, y, 3, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}

export function hitWaypoint(
  view: Viewport,
  top: TrajectoryView | undefined,
  pt: [number, number],
  radiusPx = 8,
): number | null {
  if (!top) return null;
  let best: number | null = null;
  let bestDist = radiusPx;
  for (let i = 1; i < top.wrist.length - 1; i += 1) {
    const [x, y] = worldToScreen(view, top.wrist[i]);
    const d = Math.hypot(x - pt[0], y - pt[1]);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

export function drawWeightBars(
  ctx: CanvasRenderingContext2D,
  bars: WeightBar[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const max = Math.max(1e-9, ...bars.map((b) => b.value));
  const rowH = Math.min(26, height / Math.max(1, bars.length));
  bars.forEach((bar, i) => {
    const y = i * rowH;
    ctx.fillStyle = "#90a4ae";
    ctx.fillRect(120, y + 4, (bar.value / max) * (width - 130), rowH - 8);
    ctx.fillStyle = "#37474f";
    ctx.font = "10px sans-serif";
    ctx.fillText(bar.label, 4, y + rowH / 2 + 3);
    ctx.fillText(bar.value.toFixed(2), 120 + (bar.value / max) * (width - 130) + 4, y + rowH / 2 + 3);
  });
}

export function drawScoreTrace(
  ctx: CanvasRenderingContext2D,
  trace: TracePoint[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (trace.length === 0) return;
  const values = trace.map((p) => p.topScore);
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, 1e-9);
  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  trace.forEach((p, i) => {
    const x = (i / Math.max(1, trace.length - 1)) * (width - 20) + 10;
    const y = height - 12 - ((p.topScore - lo) / (hi - lo)) * (height - 24);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  ctx.fillStyle = "#37474f";
  ctx.font = "10px sans-serif";
  ctx.fillText(`top score by iteration (${trace.length})`, 10, 10);
}

export function buildViews(
  scene: SceneView,
  width: number,
  height: number,
): { top: Viewport; side: Viewport } {
  return {
    top: fitViewport(scene, "top", width, height),
    side: fitViewport(scene, "side", width, height),
  };
}

export { metersPerPixel };
