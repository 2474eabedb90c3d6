// Pure view-state for one annotation session. Everything here is plain data
// plus transition functions so the rendering layer stays trivial and the
// logic is unit-testable without a DOM or a server.

import type { LabelEntry, Polarity, RankingEntry, StrategyBody } from "./types.js";

export type Movement = "up" | "down" | "same" | "new";

export interface CardView {
  shotId: string;
  /** Rank within the current ranking, or null when the shot fell out of view. */
  rank: number | null;
  score: number | null;
  committed: Polarity | null;
  queued: Polarity | null;
  rejected: boolean;
  focused: boolean;
}

export interface RankingRowView {
  shotId: string;
  rank: number;
  score: number;
  movement: Movement;
  committed: Polarity | null;
}

export interface SessionViewState {
  sessionId: string;
  topicId: string;
  strategy: StrategyBody;
  version: number;
  rounds: number;
  recommendations: string[];
  ranking: RankingEntry[];
  /** shot_id -> rank before the last acknowledged submit, for movement arrows. */
  previousRanks: ReadonlyMap<string, number>;
  labelHistory: LabelEntry[];
  committed: ReadonlyMap<string, Polarity>;
  queued: ReadonlyMap<string, Polarity>;
  rejectedShots: ReadonlySet<string>;
  focusIndex: number;
  banner: string | null;
}

export function emptyState(): SessionViewState {
  return {
    sessionId: "",
    topicId: "",
    strategy: { kind: "topk" },
    version: 0,
    rounds: 0,
    recommendations: [],
    ranking: [],
    previousRanks: new Map(),
    labelHistory: [],
    committed: new Map(),
    queued: new Map(),
    rejectedShots: new Set(),
    focusIndex: 0,
    banner: null,
  };
}

export function committedFromHistory(labels: LabelEntry[]): Map<string, Polarity> {
  const out = new Map<string, Polarity>();
  for (const label of labels) {
    out.set(label.shot_id, label.polarity);
  }
  return out;
}

/** Queue a label for the focused round; re-queuing the same polarity clears it. */
export function toggleQueued(state: SessionViewState, shotId: string, polarity: Polarity): SessionViewState {
  const queued = new Map(state.queued);
  if (queued.get(shotId) === polarity) {
    queued.delete(shotId);
  } else {
    queued.set(shotId, polarity);
  }
  return { ...state, queued };
}

export function moveFocus(state: SessionViewState, delta: number): SessionViewState {
  if (state.recommendations.length === 0) {
    return state;
  }
  const span = state.recommendations.length;
  const focusIndex = (state.focusIndex + delta + span) % span;
  return { ...state, focusIndex };
}

export function queuedBatch(state: SessionViewState): LabelEntry[] {
  return [...state.queued.entries()].map(([shot_id, polarity]) => ({ shot_id, polarity }));
}

export function movementOf(previous: ReadonlyMap<string, number>, shotId: string, rank: number): Movement {
  const before = previous.get(shotId);
  if (before === undefined) {
    return previous.size === 0 ? "same" : "new";
  }
  if (rank < before) {
    return "up";
  }
  if (rank > before) {
    return "down";
  }
  return "same";
}

export function cardViews(state: SessionViewState): CardView[] {
  const rankOf = new Map(state.ranking.map((entry) => [entry.shot_id, entry]));
  return state.recommendations.map((shotId, index) => {
    const entry = rankOf.get(shotId);
    return {
      shotId,
      rank: entry ? entry.rank : null,
      score: entry ? entry.score : null,
      committed: state.committed.get(shotId) ?? null,
      queued: state.queued.get(shotId) ?? null,
      rejected: state.rejectedShots.has(shotId),
      focused: index === state.focusIndex,
    };
  });
}

export function rankingRows(state: SessionViewState, limit: number): RankingRowView[] {
  return state.ranking.slice(0, limit).map((entry) => ({
    shotId: entry.shot_id,
    rank: entry.rank,
    score: entry.score,
    movement: movementOf(state.previousRanks, entry.shot_id, entry.rank),
    committed: state.committed.get(entry.shot_id) ?? null,
  }));
}

export function strategyBadge(strategy: StrategyBody): string {
  if (strategy.kind === "topk") {
    return `Top-K (k=${strategy.k ?? 100}, ${strategy.mode ?? "both"})`;
  }
  return `CAAF (batch=${strategy.batch ?? 5})`;
}

/** Apply an acknowledged submit: history, clamps, arrows baseline, new batch. */
export function afterSubmit(
  state: SessionViewState,
  accepted: LabelEntry[],
  rejected: LabelEntry[],
  version: number,
  recommendations: string[],
  ranking: RankingEntry[],
): SessionViewState {
  const committed = new Map(state.committed);
  const labelHistory = [...state.labelHistory];
  const rejectedSet = new Set(rejected.map((label) => label.shot_id));
  for (const label of accepted) {
    if (rejectedSet.has(label.shot_id)) {
      continue;
    }
    committed.set(label.shot_id, label.polarity);
    labelHistory.push(label);
  }
  const previousRanks = new Map(state.ranking.map((entry) => [entry.shot_id, entry.rank]));
  return {
    ...state,
    version,
    rounds: state.rounds + 1,
    recommendations,
    ranking,
    previousRanks,
    labelHistory,
    committed,
    queued: new Map(),
    rejectedShots: rejectedSet,
    focusIndex: 0,
    banner: null,
  };
}
