// DOM rendering. The view is a pure function of SessionViewState; handlers
// are injected so the controller owns all behavior.

import type { ApiClient } from "./api.js";
import { cardViews, rankingRows, strategyBadge, type SessionViewState } from "./state.js";
import type { Polarity } from "./types.js";

export interface ViewHandlers {
  onQueue(shotId: string, polarity: Polarity): void;
  onFocus(index: number): void;
  onSubmit(): void;
  onExport(): void;
}

const RANKING_PANEL_SIZE = 25;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

const ARROWS = { up: "↑", down: "↓", same: "·", new: "+" } as const;

export function render(
  root: HTMLElement,
  state: SessionViewState,
  api: ApiClient,
  handlers: ViewHandlers,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  if (state.banner) {
    const banner = el(doc, "div", "banner", state.banner);
    banner.setAttribute("data-testid", "banner");
    root.appendChild(banner);
  }
  if (!state.sessionId) {
    return;
  }

  const header = el(doc, "header", "session-header");
  const title = el(doc, "span", "session-id", `session ${state.sessionId}`);
  title.setAttribute("data-testid", "session-id");
  const badge = el(doc, "span", "strategy-badge", strategyBadge(state.strategy));
  badge.setAttribute("data-testid", "strategy-badge");
  const round = el(doc, "span", "round-counter", `round ${state.rounds}`);
  round.setAttribute("data-testid", "round-counter");
  const version = el(doc, "span", "version", `v${state.version}`);
  version.setAttribute("data-testid", "version");
  header.append(title, ` · topic ${state.topicId} · `, badge, " · ", round, " · ", version);
  root.appendChild(header);

  const main = el(doc, "div", "columns");
  root.appendChild(main);

  // Recommendation cards.
  const cardsPanel = el(doc, "section", "cards");
  cardsPanel.appendChild(el(doc, "h2", undefined, "to review"));
  const cardList = el(doc, "div", "card-list");
  cardList.setAttribute("data-testid", "cards");
  cardViews(state).forEach((card, index) => {
    const node = el(doc, "article", "card");
    node.setAttribute("data-testid", `card-${card.shotId}`);
    node.setAttribute("data-shot", card.shotId);
    const status = card.queued ?? card.committed ?? "unlabeled";
    node.setAttribute("data-state", status);
    if (card.focused) {
      node.classList.add("focused");
    }
    if (card.rejected) {
      node.classList.add("rejected");
      node.appendChild(el(doc, "div", "reject-flag", "rejected by service"));
    }

    const img = el(doc, "img", "thumb");
    img.setAttribute("src", api.keyframeUrl(card.shotId));
    img.setAttribute("alt", "");
    // Metadata-only card when the asset is missing.
    img.addEventListener("error", () => img.remove());
    node.appendChild(img);

    node.appendChild(el(doc, "div", "shot-id", card.shotId));
    const meta = card.rank === null ? "unranked" : `rank ${card.rank} · ${card.score?.toFixed(4)}`;
    node.appendChild(el(doc, "div", "card-meta", meta));
    node.appendChild(el(doc, "div", "card-state", status));

    const buttons = el(doc, "div", "card-buttons");
    const yes = el(doc, "button", "btn-positive", "+ (y)");
    yes.setAttribute("data-testid", `label-positive-${card.shotId}`);
    yes.addEventListener("click", () => handlers.onQueue(card.shotId, "positive"));
    const no = el(doc, "button", "btn-negative", "− (n)");
    no.setAttribute("data-testid", `label-negative-${card.shotId}`);
    no.addEventListener("click", () => handlers.onQueue(card.shotId, "negative"));
    buttons.append(yes, no);
    node.appendChild(buttons);
    node.addEventListener("click", () => handlers.onFocus(index));
    cardList.appendChild(node);
  });
  cardsPanel.appendChild(cardList);

  const submit = el(doc, "button", "submit", `submit ${state.queued.size} label(s)`);
  submit.setAttribute("data-testid", "submit");
  if (state.queued.size === 0) {
    submit.setAttribute("disabled", "");
  }
  submit.addEventListener("click", () => handlers.onSubmit());
  cardsPanel.appendChild(submit);
  main.appendChild(cardsPanel);

  // Ranking panel with movement arrows.
  const rankingPanel = el(doc, "section", "ranking");
  rankingPanel.appendChild(el(doc, "h2", undefined, `ranking (top ${RANKING_PANEL_SIZE})`));
  const list = el(doc, "ol", "ranking-list");
  list.setAttribute("data-testid", "ranking");
  for (const row of rankingRows(state, RANKING_PANEL_SIZE)) {
    const item = el(doc, "li", `rank-row move-${row.movement}`);
    item.setAttribute("data-testid", `rank-${row.shotId}`);
    item.setAttribute("data-movement", row.movement);
    const arrow = el(doc, "span", "arrow", ARROWS[row.movement]);
    const label = row.committed ? ` [${row.committed}]` : "";
    item.append(arrow, ` ${row.rank}. ${row.shotId} (${row.score.toFixed(4)})${label}`);
    list.appendChild(item);
  }
  rankingPanel.appendChild(list);
  main.appendChild(rankingPanel);

  // Label history.
  const historyPanel = el(doc, "section", "history");
  historyPanel.appendChild(el(doc, "h2", undefined, `labels (${state.labelHistory.length})`));
  const historyList = el(doc, "ul", "history-list");
  historyList.setAttribute("data-testid", "history");
  for (const label of state.labelHistory) {
    const item = el(doc, "li", `history-${label.polarity}`, `${label.shot_id}: ${label.polarity}`);
    historyList.appendChild(item);
  }
  historyPanel.appendChild(historyList);

  const exportButton = el(doc, "button", "export", "export run");
  exportButton.setAttribute("data-testid", "export");
  exportButton.addEventListener("click", () => handlers.onExport());
  historyPanel.appendChild(exportButton);
  main.appendChild(historyPanel);
}
