// Session controller: owns the state, talks to the service, re-renders.
// All ranking logic stays server-side; this layer only queues labels and
// mirrors acknowledged responses.

import { ApiClient, ServiceError } from "./api.js";
import {
  afterSubmit,
  committedFromHistory,
  emptyState,
  moveFocus,
  queuedBatch,
  toggleQueued,
  type SessionViewState,
} from "./state.js";
import type { CreateSessionRequest, Polarity } from "./types.js";
import { render, type ViewHandlers } from "./view.js";

export class AnnotatorApp {
  state: SessionViewState = emptyState();
  private readonly handlers: ViewHandlers;

  constructor(
    readonly api: ApiClient,
    readonly root: HTMLElement,
    private readonly onSessionChange: (sessionId: string) => void = () => {},
  ) {
    this.handlers = {
      onQueue: (shotId, polarity) => this.queueLabel(shotId, polarity),
      onFocus: (index) => {
        this.state = { ...this.state, focusIndex: index };
        this.redraw();
      },
      onSubmit: () => {
        void this.submitQueued();
      },
      onExport: () => {
        void this.exportRun();
      },
    };
    this.redraw();
  }

  redraw(): void {
    render(this.root, this.state, this.api, this.handlers);
  }

  private showBanner(message: string): void {
    this.state = { ...this.state, banner: message };
    this.redraw();
  }

  async startSession(request: CreateSessionRequest): Promise<void> {
    try {
      const created = await this.api.createSession(request);
      const ranking = await this.api.getRanking(created.session_id);
      this.state = {
        ...emptyState(),
        sessionId: created.session_id,
        topicId: request.topic_id,
        strategy: request.strategy,
        recommendations: created.recommendations,
        ranking: ranking.entries,
        version: ranking.version,
      };
      this.onSessionChange(created.session_id);
      this.redraw();
    } catch (error) {
      this.state = emptyState();
      this.showBanner(errorMessage(error));
    }
  }

  /** Rebuild the whole view from GET endpoints, e.g. after a page reload. */
  async resumeSession(sessionId: string): Promise<void> {
    try {
      const meta = await this.api.getSession(sessionId);
      const ranking = await this.api.getRanking(sessionId);
      this.state = {
        ...emptyState(),
        sessionId: meta.session_id,
        topicId: meta.topic_id,
        strategy: meta.strategy,
        version: meta.version,
        rounds: meta.rounds,
        recommendations: meta.recommendations,
        ranking: ranking.entries,
        labelHistory: meta.labels,
        committed: committedFromHistory(meta.labels),
      };
      this.onSessionChange(meta.session_id);
      this.redraw();
    } catch (error) {
      this.state = emptyState();
      this.showBanner(errorMessage(error));
    }
  }

  queueLabel(shotId: string, polarity: Polarity): void {
    this.state = toggleQueued(this.state, shotId, polarity);
    this.redraw();
  }

  focusDelta(delta: number): void {
    this.state = moveFocus(this.state, delta);
    this.redraw();
  }

  focusedShot(): string | null {
    return this.state.recommendations[this.state.focusIndex] ?? null;
  }

  async submitQueued(): Promise<void> {
    const batch = queuedBatch(this.state);
    if (batch.length === 0) {
      return;
    }
    try {
      const ack = await this.api.postLabels(this.state.sessionId, batch);
      const ranking = await this.api.getRanking(this.state.sessionId);
      this.state = afterSubmit(this.state, batch, ack.rejected, ack.version, ack.recommendations, ranking.entries);
      this.redraw();
    } catch (error) {
      this.showBanner(errorMessage(error));
    }
  }

  /** Download the current run; resolves to the exact exported bytes. */
  async exportRun(): Promise<string> {
    const text = await this.api.exportRun(this.state.sessionId);
    triggerDownload(this.root.ownerDocument, `${this.state.sessionId}.run`, text);
    return text;
  }

  handleKey(key: string): void {
    if (!this.state.sessionId) {
      return;
    }
    if (key === "ArrowRight" || key === "ArrowDown") {
      this.focusDelta(1);
    } else if (key === "ArrowLeft" || key === "ArrowUp") {
      this.focusDelta(-1);
    } else if (key === "y" || key === "n") {
      const shot = this.focusedShot();
      if (shot) {
        this.queueLabel(shot, key === "y" ? "positive" : "negative");
      }
    } else if (key === "Enter") {
      void this.submitQueued();
    }
  }
}

function errorMessage(error: unknown): string {
  if (error instanceof ServiceError) {
    return `service error: ${error.code}`;
  }
  return `service unreachable: ${String(error)}`;
}

function triggerDownload(doc: Document, filename: string, text: string): void {
  // Best effort; test environments may lack object URLs.
  try {
    const url = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
    const anchor = doc.createElement("a");
    anchor.href = url;
    anchor.download = filename;
    anchor.click();
    URL.revokeObjectURL(url);
  } catch {
    // The caller still receives the bytes.
  }
}
