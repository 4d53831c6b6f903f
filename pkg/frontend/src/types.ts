// Payload shapes of the feedback service API.

export interface SceneObjectView {
  id: string;
  center: number[];
  half_extents: number[];
  attributes: number[];
}

export interface SceneView {
  attributes: string[];
  objects: SceneObjectView[];
  manipulated_id: string;
  table_height: number;
  goal: number[];
  start_config: number[];
  arm: { shoulder_origin: number[]; link_upper: number; link_fore: number };
}

export interface TrajectoryView {
  rank: number;
  index: number;
  score: number;
  waypoints: number[][];
  wrist: number[][];
  deviation: number[];
}

export interface SessionPayload {
  session_id: string;
  iteration: number;
  scene: SceneView;
  top: TrajectoryView[];
  weight_hash: string;
}

export interface UpdateSummary {
  iteration: number;
  accepted: boolean;
  weight_delta_norm: number;
  weight_hash: string;
  detail?: string;
}

export interface FeedbackResponse {
  update: UpdateSummary;
  next: SessionPayload;
}

export interface ManifestEntry {
  vector: "interaction" | "motion";
  index: number;
  block: string;
  third: number | null;
  description: string;
  scale: number;
}

export interface SessionState {
  session_id: string;
  iteration: number;
  weight_hash: string;
  weights: { interaction: number[]; motion: number[] };
  history: Record<string, unknown>[];
  manifest: ManifestEntry[];
  top: TrajectoryView[];
  scene: SceneView;
}

export interface CreateSessionOptions {
  scenario_seed?: number;
  family?: string;
  seed?: number;
  k?: number;
  candidates?: number;
}
