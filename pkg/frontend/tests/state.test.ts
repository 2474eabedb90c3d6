import { describe, expect, it } from "vitest";

import {
  afterSubmit,
  cardViews,
  committedFromHistory,
  emptyState,
  moveFocus,
  movementOf,
  queuedBatch,
  rankingRows,
  strategyBadge,
  toggleQueued,
  type SessionViewState,
} from "../src/state.js";
import type { RankingEntry } from "../src/types.js";

function entries(ids: string[]): RankingEntry[] {
  return ids.map((shot_id, i) => ({ shot_id, score: 1 - i / ids.length, rank: i + 1 }));
}

function seeded(): SessionViewState {
  return {
    ...emptyState(),
    sessionId: "abc",
    topicId: "9001",
    strategy: { kind: "topk", k: 5 },
    recommendations: ["s1", "s2", "s3"],
    ranking: entries(["s1", "s2", "s3", "s4"]),
  };
}

describe("toggleQueued", () => {
  it("queues a polarity and overwrites on change", () => {
    let state = toggleQueued(seeded(), "s1", "positive");
    expect(state.queued.get("s1")).toBe("positive");
    state = toggleQueued(state, "s1", "negative");
    expect(state.queued.get("s1")).toBe("negative");
  });

  it("re-queuing the same polarity clears the queue entry", () => {
    let state = toggleQueued(seeded(), "s1", "positive");
    state = toggleQueued(state, "s1", "positive");
    expect(state.queued.has("s1")).toBe(false);
  });

  it("queuedBatch lists queued labels", () => {
    let state = toggleQueued(seeded(), "s1", "positive");
    state = toggleQueued(state, "s3", "negative");
    expect(queuedBatch(state)).toEqual([
      { shot_id: "s1", polarity: "positive" },
      { shot_id: "s3", polarity: "negative" },
    ]);
  });
});

describe("moveFocus", () => {
  it("wraps around the recommendation batch", () => {
    let state = seeded();
    state = moveFocus(state, -1);
    expect(state.focusIndex).toBe(2);
    state = moveFocus(state, 1);
    expect(state.focusIndex).toBe(0);
  });

  it("is inert without recommendations", () => {
    const state = moveFocus(emptyState(), 1);
    expect(state.focusIndex).toBe(0);
  });
});

describe("movementOf", () => {
  const previous = new Map([
    ["a", 1],
    ["b", 2],
    ["c", 3],
  ]);

  it("flags climbs and falls against the previous ranking", () => {
    expect(movementOf(previous, "c", 1)).toBe("up");
    expect(movementOf(previous, "a", 3)).toBe("down");
    expect(movementOf(previous, "b", 2)).toBe("same");
    expect(movementOf(previous, "zz", 4)).toBe("new");
  });

  it("treats the first render as all-same", () => {
    expect(movementOf(new Map(), "a", 1)).toBe("same");
  });
});

describe("afterSubmit", () => {
  it("commits accepted labels, keeps rejected flagged, resets the queue", () => {
    let state = seeded();
    state = toggleQueued(state, "s1", "positive");
    state = toggleQueued(state, "s2", "negative");
    const batch = queuedBatch(state);
    const next = afterSubmit(
      state,
      batch,
      [{ shot_id: "s2", polarity: "negative" }],
      1,
      ["s3", "s4"],
      entries(["s1", "s3", "s4", "s2"]),
    );
    expect(next.version).toBe(1);
    expect(next.rounds).toBe(1);
    expect(next.committed.get("s1")).toBe("positive");
    expect(next.committed.has("s2")).toBe(false);
    expect(next.rejectedShots.has("s2")).toBe(true);
    expect(next.queued.size).toBe(0);
    expect(next.labelHistory).toEqual([{ shot_id: "s1", polarity: "positive" }]);
    expect(next.previousRanks.get("s2")).toBe(2);
  });

  it("movement arrows reflect the pre-submit ranking", () => {
    let state = seeded();
    state = toggleQueued(state, "s3", "positive");
    const next = afterSubmit(state, queuedBatch(state), [], 1, ["s1"], entries(["s3", "s1", "s2", "s4"]));
    const rows = rankingRows(next, 10);
    expect(rows[0]).toMatchObject({ shotId: "s3", movement: "up" });
    expect(rows[1]).toMatchObject({ shotId: "s1", movement: "down" });
  });
});

describe("cardViews", () => {
  it("carries rank, score, queue state and focus", () => {
    let state = seeded();
    state = toggleQueued(state, "s2", "positive");
    state = { ...state, focusIndex: 1 };
    const cards = cardViews(state);
    expect(cards.map((c) => c.shotId)).toEqual(["s1", "s2", "s3"]);
    expect(cards[1]).toMatchObject({ queued: "positive", focused: true, rank: 2 });
    expect(cards[0]?.rank).toBe(1);
  });

  it("marks shots missing from the ranking as unranked", () => {
    const state = { ...seeded(), recommendations: ["zz"] };
    expect(cardViews(state)[0]).toMatchObject({ rank: null, score: null });
  });
});

describe("misc", () => {
  it("committedFromHistory keeps the latest polarity", () => {
    const committed = committedFromHistory([
      { shot_id: "a", polarity: "negative" },
      { shot_id: "a", polarity: "positive" },
    ]);
    expect(committed.get("a")).toBe("positive");
  });

  it("strategy badges summarize parameters", () => {
    expect(strategyBadge({ kind: "topk", k: 7 })).toContain("k=7");
    expect(strategyBadge({ kind: "caaf", batch: 3 })).toContain("batch=3");
  });
});
