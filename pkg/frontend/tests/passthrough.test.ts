// End-to-end passthrough: a scripted browser session must export exactly the
// bytes the service produces when driven directly with the same label
// sequence, and a page reload must rebuild the identical view from GETs.

import { beforeEach, describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotatorApp } from "../src/app.js";
import { mount } from "../src/main.js";
import type { LabelEntry, PostLabelsResponse, StrategyBody } from "../src/types.js";

const serviceUrl = inject("serviceUrl");
const TOPIC = "9001";

async function until(condition: () => boolean, timeoutMs = 10000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (condition()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error("condition not reached in time");
}

/** Deterministic label script shared by the UI drive and the direct drive. */
function scriptedLabels(recommendations: string[], round: number): LabelEntry[] {
  const pick = (i: number) => recommendations[Math.min(i, recommendations.length - 1)]!;
  if (round === 0) {
    return [
      { shot_id: pick(0), polarity: "positive" },
      { shot_id: pick(1), polarity: "negative" },
    ];
  }
  if (round === 1) {
    return [
      { shot_id: pick(0), polarity: "positive" },
      { shot_id: pick(2), polarity: "negative" },
    ];
  }
  return [{ shot_id: pick(1), polarity: "positive" }];
}

async function driveServiceDirectly(strategy: StrategyBody, rounds: number): Promise<string> {
  const create = await fetch(`${serviceUrl}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ run: "base.run", topic_id: TOPIC, strategy }),
  });
  expect(create.status).toBe(201);
  const created = (await create.json()) as { session_id: string; recommendations: string[] };
  let recommendations = created.recommendations;
  for (let round = 0; round < rounds; round += 1) {
    const response = await fetch(`${serviceUrl}/sessions/${created.session_id}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ labels: scriptedLabels(recommendations, round) }),
    });
    expect(response.status).toBe(200);
    recommendations = ((await response.json()) as PostLabelsResponse).recommendations;
  }
  return await (await fetch(`${serviceUrl}/sessions/${created.session_id}/export`)).text();
}

function freshRoot(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

function cardShots(root: HTMLElement): string[] {
  return [...root.querySelectorAll("[data-testid=cards] article")].map(
    (node) => node.getAttribute("data-shot")!,
  );
}

async function driveUi(app: AnnotatorApp, root: HTMLElement, rounds: number): Promise<string> {
  for (let round = 0; round < rounds; round += 1) {
    const versionBefore = app.state.version;
    const labels = scriptedLabels(cardShots(root), round);
    for (const label of labels) {
      const button = root.querySelector<HTMLButtonElement>(
        `[data-testid=label-${label.polarity}-${label.shot_id}]`,
      );
      expect(button, `label button for ${label.shot_id}`).toBeTruthy();
      button!.click();
    }
    root.querySelector<HTMLButtonElement>("[data-testid=submit]")!.click();
    await until(() => app.state.version === versionBefore + 1);
  }
  return await app.exportRun();
}

describe("UI passthrough", () => {
  let root: HTMLElement;

  beforeEach(() => {
    root = freshRoot();
  });

  it("topk: scripted browser session exports service-identical bytes", async () => {
    const strategy: StrategyBody = { kind: "topk", k: 5 };
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy });
    expect(app.state.sessionId).not.toBe("");
    const uiBytes = await driveUi(app, root, 3);
    const directBytes = await driveServiceDirectly(strategy, 3);
    expect(uiBytes).toBe(directBytes);
  });

  it("caaf: scripted browser session exports service-identical bytes", async () => {
    const strategy: StrategyBody = { kind: "caaf", a_probe: 11, batch: 3 };
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy });
    const uiBytes = await driveUi(app, root, 3);
    const directBytes = await driveServiceDirectly(strategy, 3);
    expect(uiBytes).toBe(directBytes);
  });

  it("export without new labels is stable", async () => {
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy: { kind: "topk", k: 5 } });
    await driveUi(app, root, 1);
    const first = await app.exportRun();
    const second = await app.exportRun();
    expect(second).toBe(first);
  });

  it("all-negative batches drop out of later recommendations", async () => {
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy: { kind: "topk", k: 4 } });
    const batch = cardShots(root);
    for (const shot of batch) {
      root.querySelector<HTMLButtonElement>(`[data-testid=label-negative-${shot}]`)!.click();
    }
    root.querySelector<HTMLButtonElement>("[data-testid=submit]")!.click();
    await until(() => app.state.version === 1);
    const next = cardShots(root);
    for (const shot of batch) {
      expect(next).not.toContain(shot);
    }
  });

  it("service errors surface as a banner with no partial session", async () => {
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: "no-such-topic", strategy: { kind: "topk", k: 5 } });
    expect(app.state.sessionId).toBe("");
    const banner = root.querySelector("[data-testid=banner]");
    expect(banner?.textContent).toContain("unknown_topic");
  });
});

describe("page reload", () => {
  // Movement arrows decorate the last acknowledged transition; a fresh page
  // has no previous round to diff against, so they are normalized away and
  // everything else must match exactly.
  function normalize(node: Element): string {
    const clone = node.cloneNode(true) as Element;
    clone.querySelectorAll(".arrow").forEach((arrow) => arrow.remove());
    clone.querySelectorAll("[data-movement]").forEach((row) => {
      row.removeAttribute("data-movement");
      row.setAttribute("class", "rank-row");
    });
    return clone.innerHTML;
  }

  function viewSnapshot(root: HTMLElement): Record<string, string> {
    const get = (id: string) => {
      const node = root.querySelector(`[data-testid=${id}]`);
      return node ? normalize(node) : "";
    };
    return {
      ranking: get("ranking"),
      history: get("history"),
      cards: get("cards"),
      round: root.querySelector("[data-testid=round-counter]")?.textContent ?? "",
      version: root.querySelector("[data-testid=version]")?.textContent ?? "",
      badge: root.querySelector("[data-testid=strategy-badge]")?.textContent ?? "",
    };
  }

  it("restores the identical view from GET endpoints", async () => {
    const root = freshRoot();
    const app = new AnnotatorApp(new ApiClient(serviceUrl), root);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy: { kind: "topk", k: 5 } });
    await driveUi(app, root, 2);
    const before = viewSnapshot(root);
    const sessionId = app.state.sessionId;

    document.body.innerHTML = '<div id="app"></div>';
    const rootAfter = document.getElementById("app")!;
    const reloaded = new AnnotatorApp(new ApiClient(serviceUrl), rootAfter);
    await reloaded.resumeSession(sessionId);
    expect(viewSnapshot(rootAfter)).toEqual(before);
  });
});

describe("keyboard shortcuts", () => {
  it("y/n queue labels on the focused card, arrows move focus, Enter submits", async () => {
    document.body.innerHTML = `
      <form id="start-form">
        <input name="run" value="base.run" />
        <input name="topic" value="${TOPIC}" />
        <select name="strategy"><option value="topk" selected>topk</option></select>
        <input name="k" value="5" />
        <input name="batch" value="5" />
      </form>
      <div id="app"></div>`;
    (window as unknown as { happyDOM: { setURL(url: string): void } }).happyDOM.setURL(
      `http://localhost/?service=${encodeURIComponent(serviceUrl)}`,
    );
    const app = mount(document);
    await app.startSession({ run: "base.run", topic_id: TOPIC, strategy: { kind: "topk", k: 5 } });
    const shots = cardShots(document.getElementById("app")!);

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "y", bubbles: true }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowRight", bubbles: true }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "n", bubbles: true }));
    expect(app.state.queued.get(shots[0]!)).toBe("positive");
    expect(app.state.queued.get(shots[1]!)).toBe("negative");

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter", bubbles: true }));
    await until(() => app.state.version === 1);
    expect(app.state.labelHistory).toHaveLength(2);
  });
});
