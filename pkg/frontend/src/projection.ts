// Orthographic projections between world space and canvas pixels.
//
// Two synchronized views: "top" maps world (x, y) onto the canvas and
// "side" maps world (x, z). Layout is deterministic: a fixed world window
// derived from the scene bounds, uniform scale, y-up flipped for screens.

import type { SceneView } from "./types";

export type ViewKind = "top" | "side";

export interface Viewport {
  kind: ViewKind;
  width: number;
  height: number;
  // world-space window
  minA: number;
  maxA: number;
  minB: number;
  maxB: number;
}

const MARGIN = 0.15;

function axes(kind: ViewKind): [number, number] {
  return kind === "top" ? [0, 1] : [0, 2];
}

export function fitViewport(
  scene: SceneView,
  kind: ViewKind,
  width: number,
  height: number,
): Viewport {
  const [ia, ib] = axes(kind);
  let minA = Infinity;
  let maxA = -Infinity;
  let minB = Infinity;
  let maxB = -Infinity;
  const include = (a: number, b: number) => {
    minA = Math.min(minA, a);
    maxA = Math.max(maxA, a);
    minB = Math.min(minB, b);
    maxB = Math.max(maxB, b);
  };
  for (const obj of scene.objects) {
    include(obj.center[ia] - obj.half_extents[ia], obj.center[ib] - obj.half_extents[ib]);
    include(obj.center[ia] + obj.half_extents[ia], obj.center[ib] + obj.half_extents[ib]);
  }
  include(scene.goal[ia], scene.goal[ib]);
  include(scene.arm.shoulder_origin[ia], scene.arm.shoulder_origin[ib]);
  const reach = scene.arm.link_upper + scene.arm.link_fore;
  include(scene.arm.shoulder_origin[ia] - reach, scene.arm.shoulder_origin[ib] - reach);
  include(scene.arm.shoulder_origin[ia] + reach, scene.arm.shoulder_origin[ib] + reach);
  if (kind === "side") {
    include(0, scene.table_height);
  }
  minA -= MARGIN;
  maxA += MARGIN;
  minB -= MARGIN;
  maxB += MARGIN;
  // uniform scale: widen the smaller world span to match the pixel aspect
  const spanA = maxA - minA;
  const spanB = maxB - minB;
  const worldAspect = spanA / spanB;
  const pixelAspect = width / height;
  if (worldAspect < pixelAspect) {
    const grow = spanB * pixelAspect - spanA;
    minA -= grow / 2;
    maxA += grow / 2;
  } else {
    const grow = spanA / pixelAspect - spanB;
    minB -= grow / 2;
    maxB += grow / 2;
  }
  return { kind, width, height, minA, maxA, minB, maxB };
}

export function worldToScreen(view: Viewport, p: number[]): [number, number] {
  const [ia, ib] = axes(view.kind);
  const u = ((p[ia] - view.minA) / (view.maxA - view.minA)) * view.width;
  const v = view.height - ((p[ib] - view.minB) / (view.maxB - view.minB)) * view.height;
  return [u, v];
}

// Inverse of worldToScreen for the two visible coordinates; the hidden
// coordinate keeps the value of `anchor` (drags never move it).
export function screenToWorld(
  view: Viewport,
  pt: [number, number],
  anchor: number[],
): number[] {
  const [ia, ib] = axes(view.kind);
  const a = view.minA + (pt[0] / view.width) * (view.maxA - view.minA);
  const b = view.minB + ((view.height - pt[1]) / view.height) * (view.maxB - view.minB);
  const out = [...anchor];
  out[ia] = a;
  out[ib] = b;
  return out;
}

export function metersPerPixel(view: Viewport): number {
  return (view.maxA - view.minA) / view.width;
}
