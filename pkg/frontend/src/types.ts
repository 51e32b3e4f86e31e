export interface SessionInfo {
  id: string;
  revision: number;
  width: number;
  height: number;
  depth: string;
  n_levels: number;
  settings: Record<string, unknown>;
}

export interface MetricsResults {
  npc: number;
  pc: number;
  n_classes: number;
  nominal_range: [number, number];
  compute_path: string;
  per_class_error: Record<string, number>;
  pairwise: number[][] | null;
  pairwise_class_ids?: number[];
}

export interface MetricsResponse {
  revision: number;
  class_ids: number[];
  results: MetricsResults;
}

export interface Stroke {
  x: number;
  y: number;
  class_id: number;
}

export interface SessionSettings {
  quant_bins?: number;
  domain_range?: string;
  channel?: string;
  tie_break?: "lowest" | "highest";
  unseen?: "unassigned" | "nearest";
  path?: string;
  max_classes?: number;
}

export type OverlayMode =
  | { kind: "none" }
  | { kind: "segmentation" }
  | { kind: "single-class"; classId: number };
