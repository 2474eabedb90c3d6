// Browser bootstrap: reads ?service= and ?session= from the URL, mounts the
// app, wires the start form and global keyboard shortcuts.

import { ApiClient } from "./api.js";
import { AnnotatorApp } from "./app.js";
import type { CreateSessionRequest, StrategyKind } from "./types.js";

function param(name: string, fallback = ""): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export function mount(doc: Document): AnnotatorApp {
  const serviceUrl = param("service", "http://localhost:8080");
  const api = new ApiClient(serviceUrl);
  const root = doc.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const app = new AnnotatorApp(api, root, (sessionId) => {
    const url = new URL(window.location.href);
    url.searchParams.set("session", sessionId);
    window.history.replaceState(null, "", url.toString());
  });

  doc.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT")) {
      return;
    }
    app.handleKey(event.key);
  });

  const form = doc.getElementById("start-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const kind = String(data.get("strategy") ?? "topk") as StrategyKind;
    const request: CreateSessionRequest = {
      run: String(data.get("run") ?? ""),
      topic_id: String(data.get("topic") ?? ""),
      strategy:
        kind === "topk"
          ? { kind, k: Number(data.get("k") ?? 100) }
          : { kind, batch: Number(data.get("batch") ?? 5) },
    };
    void app.startSession(request);
  });

  const existing = param("session");
  if (existing) {
    void app.resumeSession(existing);
  }
  return app;
}

declare global {
  interface Window {
    annotator?: AnnotatorApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("app")) {
  window.annotator = mount(document);
}
