// Payload shapes served by the bundle API. Field names mirror the JSON
// exactly; the UI never derives numbers on its own, it only reshapes these.

export type Mode = "above_threshold" | "below_threshold";
export type Nabc = "N" | "A" | "B" | "C";
export type FlowKind = "within_category" | "cross_category";
export type FlowStatus = "proposed" | "accepted" | "rejected";
export type Verdict = "agree" | "disagree" | "pending";

export interface GraphNode {
  id: string;
  domain: string;
  nabc: Nabc;
  degree: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  weight: number;
}

export interface GraphPayload {
  nodes: GraphNode[];
  edges: GraphEdge[];
  meta: { mode: Mode; percentile: number; threshold: number };
}

export interface LayoutPayload {
  positions: Record<string, [number, number, number]>;
  iterations_used: number;
  final_residual: number;
  converged: boolean;
  params: { seed: number };
}

export interface FlowMapPresentation {
  id: string;
  order_index: number;
  presenter: string;
  domain: string;
}

export interface FlowMapNode {
  id: string;
  nabc: Nabc;
  presentation: string;
}

export interface FlowMapEdge {
  source: string;
  target: string;
  kind: FlowKind;
  status: FlowStatus;
  reasoning: string;
}

export interface FlowMapPayload {
  presentations: FlowMapPresentation[];
  nodes: FlowMapNode[];
  edges: FlowMapEdge[];
}

export interface ViewpointRecord {
  id: string;
  index: number;
  nabc: Nabc;
  presentation_id: string;
  summary: string;
  quote: string;
}

export interface ViewpointsPayload {
  presentations: Record<string, ViewpointRecord[]>;
}

export interface SurveyEndpoint {
  viewpoint_id: string;
  presenter: string;
  domain: string;
  nabc: Nabc;
  summary: string;
  quote: string;
}

export interface SurveyItem {
  id: string;
  source: SurveyEndpoint;
  target: SurveyEndpoint;
  direction: string;
  reasoning: string;
  kind: FlowKind;
  verdict: Verdict;
}

export interface SurveyPayload {
  items: SurveyItem[];
  stats?: SurveyStats;
}

export interface SurveyStats {
  total_items: number;
  reviewed: number;
  agreed: number;
  disagreed: number;
  disagreement_rate: number;
  coverage: number;
}

export interface RatioEntry {
  t: number;
  nodes: number;
  edges: number;
  ratio: number;
  n_new: number;
  e_new: number;
}

export interface TrendPayload {
  deltas: number[];
  decreases: number[];
  responsible: Record<string, string>;
  slope: number;
  verdict: string;
}

export interface RatioPayload {
  entries: RatioEntry[];
  trend: TrendPayload | null;
  meta: { selector: "all" | "accepted" };
}

export interface SurveyResponse {
  item_id: string;
  reviewer: string;
  verdict: "agree" | "disagree";
  comment?: string;
}
