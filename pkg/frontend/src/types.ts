// Wire types of the session service. Field names mirror the HTTP contract
// exactly; the UI never reinterprets them.

export type Polarity = "positive" | "negative";

export type StrategyKind = "topk" | "caaf";

export interface LabelEntry {
  shot_id: string;
  polarity: Polarity;
}

export interface StrategyBody {
  kind: StrategyKind;
  k?: number;
  mode?: "positive_only" | "negative_only" | "both";
  a_probe?: number;
  n_gallery?: number;
  beta?: number | string;
  lam?: number;
  batch?: number;
  max_sweeps?: number;
  tol?: number;
}

export interface CreateSessionRequest {
  run: string;
  topic_id: string;
  strategy: StrategyBody;
  features?: string;
}

export interface CreateSessionResponse {
  session_id: string;
  recommendations: string[];
}

export interface SessionMeta {
  session_id: string;
  topic_id: string;
  strategy: StrategyBody;
  version: number;
  rounds: number;
  labels: LabelEntry[];
  recommendations: string[];
}

export interface RankingEntry {
  shot_id: string;
  score: number;
  rank: number;
}

export interface RankingResponse {
  session_id: string;
  topic_id: string;
  version: number;
  entries: RankingEntry[];
}

export interface PostLabelsResponse {
  version: number;
  recommendations: string[];
  rejected: LabelEntry[];
}

export interface ErrorBody {
  code: string;
  detail?: unknown;
}
