// UI state and feedback actions, independent of any DOM.
//
// The view model holds the latest session payload, the score trace and the
// weight bars; every learning interaction flows through the two feedback
// endpoints and nothing else. One request is in flight at a time; failed
// actions surface a toast and leave the state untouched so the rendered
// ranking always mirrors the service payload order.

import { ApiClient, ApiError } from "./api";
import { screenToWorld, Viewport } from "./projection";
import type {
  CreateSessionOptions,
  ManifestEntry,
  SessionPayload,
  TrajectoryView,
} from "./types";

export interface WeightBar {
  label: string;
  value: number;
}

export interface TracePoint {
  iteration: number;
  topScore: number;
}

export class ViewModel {
  session: SessionPayload | null = null;
  manifest: ManifestEntry[] = [];
  weightBars: WeightBar[] = [];
  scoreTrace: TracePoint[] = [];
  selectedRank = 1;
  busy = false;
  toast: string | null = null;
  listeners: (() => void)[] = [];

  constructor(private client: ApiClient) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  get iteration(): number {
    return this.session ? this.session.iteration : 0;
  }

  get top(): TrajectoryView[] {
    // rendered in payload order; ranking order is the service's
    return this.session ? this.session.top : [];
  }

  async create(opts: CreateSessionOptions): Promise<void> {
    this.busy = true;
    this.emit();
    try {
      const payload = await this.client.createSession(opts);
      this.session = payload;
      this.selectedRank = 1;
      this.scoreTrace = [
        { iteration: payload.iteration, topScore: payload.top[0]?.score ?? 0 },
      ];
      await this.refreshState();
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  // Rebuild everything from GET /sessions/{id}; a page refresh lands here.
  async attach(sessionId: string): Promise<void> {
    this.busy = true;
    this.emit();
    try {
      const state = await this.client.getState(sessionId);
      this.session = {
        session_id: state.session_id,
        iteration: state.iteration,
        scene: state.scene,
        top: state.top,
        weight_hash: state.weight_hash,
      };
      this.manifest = state.manifest;
      this.rebuildBars(state.weights.interaction, state.weights.motion);
      this.scoreTrace = [
        { iteration: state.iteration, topScore: state.top[0]?.score ?? 0 },
      ];
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  private async refreshState(): Promise<void> {
    if (!this.session) return;
    const state = await this.client.getState(this.session.session_id);
    this.manifest = state.manifest;
    this.rebuildBars(state.weights.interaction, state.weights.motion);
  }

  private rebuildBars(interaction: number[], motion: number[]): void {
    // aggregate weight magnitude per manifest block for compact bars
    const groups = new Map<string, number>();
    for (const entry of this.manifest) {
      const value =
        entry.vector === "interaction"
          ? interaction[entry.index]
          : motion[entry.index];
      const key = entry.vector === "interaction" ? "pair interactions" : entry.block;
      groups.set(key, (groups.get(key) ?? 0) + Math.abs(value));
    }
    this.weightBars = [...groups.entries()].map(([label, value]) => ({
      label,
      value,
    }));
  }

  async clickRerank(rank: number): Promise<boolean> {
    if (!this.session || this.busy) return false;
    this.busy = true;
    this.toast = null;
    this.emit();
    try {
      const resp = await this.client.rerank(this.session.session_id, rank);
      this.session = resp.next;
      this.selectedRank = 1;
      this.scoreTrace.push({
        iteration: resp.next.iteration,
        topScore: resp.next.top[0]?.score ?? 0,
      });
      await this.refreshState();
      return true;
    } catch (err) {
      this.toast = err instanceof ApiError ? err.message : String(err);
      return false; // no advance on error
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  // Drag of waypoint `index` of the top trajectory to a screen point in the
  // active view; the hidden coordinate stays at the waypoint's current value.
  async dragWaypoint(
    index: number,
    screenPt: [number, number],
    view: Viewport,
  ): Promise<boolean> {
    if (!this.session || this.busy) return false;
    const top = this.session.top[0];
    if (!top) return false;
    const anchor = top.wrist[index];
    const target = screenToWorld(view, screenPt, anchor);
    return this.submitEdit(index, target);
  }

  async submitEdit(index: number, target: number[]): Promise<boolean> {
    if (!this.session || this.busy) return false;
    this.busy = true;
    this.toast = null;
    this.emit();
    try {
      const resp = await this.client.edit(this.session.session_id, index, target);
      this.session = resp.next;
      this.selectedRank = 1;
      this.scoreTrace.push({
        iteration: resp.next.iteration,
        topScore: resp.next.top[0]?.score ?? 0,
      });
      await this.refreshState();
      return true;
    } catch (err) {
      // rejected edits revert visually: state untouched
      this.toast = err instanceof ApiError ? err.message : String(err);
      return false;
    } finally {
      this.busy = false;
      this.emit();
    }
  }
}
