/**
 * The query console: one session, one query box, three result modalities.
 *
 * All state here is rebuilt from service responses — the page can be
 * refreshed at any point and lost nothing but scroll position. One query is
 * in flight per tab at a time; the service handles concurrent tabs.
 */

import { ApiError } from "./api.js";
import type {
  ArtifactResponse,
  GenericResult,
  Modality,
  QueryResult,
  SessionDetail,
  SkimDoc,
  StoryboardDoc,
  TextDoc,
} from "./api.js";
import { formatInterval, formatSeconds } from "./format.js";
import { SkimPlayer } from "./player.js";
import type { IntervalVideo } from "./player.js";
import { renderStoryboard } from "./storyboard.js";

/** What the console needs from the service client (SummaryApi provides it). */
export interface ConsoleApi {
  frameUrl(sessionId: string, imageLocator: string): string;
  runQuery(sessionId: string, text: string, modality: Modality): Promise<QueryResult>;
  runGeneric(sessionId: string, force?: boolean): Promise<GenericResult>;
  artifact(sessionId: string, key: string): Promise<ArtifactResponse>;
}

export interface HistoryEntry {
  text: string;
  modality: Modality;
  cached: boolean;
}

/** Every element id the console wires; index.html must provide them all. */
export const REQUIRED_IDS = [
  "session-label",
  "raw-video-link",
  "source-video",
  "query-text",
  "modality",
  "run-query",
  "status",
  "error",
  "error-message",
  "retry",
  "latency",
  "storyboard-section",
  "result-board",
  "skim-section",
  "skim-intervals",
  "play-skim",
  "text-section",
  "text-sentence",
  "text-provenance",
  "play-text-skim",
  "history",
  "load-generic",
  "generic-status",
  "generic-board",
  "generic-skim-intervals",
  "play-generic-skim",
  "generic-text",
] as const;

type ElementId = (typeof REQUIRED_IDS)[number];

export interface ConsoleController {
  submit(): Promise<void>;
  rerun(index: number): Promise<void>;
  loadGeneric(): Promise<void>;
  readonly busy: boolean;
  readonly history: HistoryEntry[];
}

const intervalList = (target: HTMLElement, skim: SkimDoc): HTMLLIElement[] => {
  target.replaceChildren();
  return skim.intervals.map((interval) => {
    const item = document.createElement("li");
    item.textContent = formatInterval(interval.start_s, interval.end_s);
    target.append(item);
    return item;
  });
};

export function wireConsole(
  doc: Document,
  api: ConsoleApi,
  session: SessionDetail,
): ConsoleController {
  const el = <T extends HTMLElement>(id: ElementId): T => {
    const found = doc.getElementById(id);
    if (!found) {
      throw new Error(`console markup is missing #${id}`);
    }
    return found as T;
  };

  const sessionLabel = el<HTMLElement>("session-label");
  const rawLink = el<HTMLAnchorElement>("raw-video-link");
  const video = el<HTMLVideoElement>("source-video");
  const queryText = el<HTMLInputElement>("query-text");
  const modalitySelect = el<HTMLSelectElement>("modality");
  const runButton = el<HTMLButtonElement>("run-query");
  const status = el<HTMLElement>("status");
  const errorBox = el<HTMLElement>("error");
  const errorMessage = el<HTMLElement>("error-message");
  const retryButton = el<HTMLButtonElement>("retry");
  const latencyList = el<HTMLElement>("latency");
  const sections = {
    storyboard: el<HTMLElement>("storyboard-section"),
    skim: el<HTMLElement>("skim-section"),
    text: el<HTMLElement>("text-section"),
  };
  const resultBoard = el<HTMLElement>("result-board");
  const skimIntervals = el<HTMLElement>("skim-intervals");
  const playSkim = el<HTMLButtonElement>("play-skim");
  const textSentence = el<HTMLElement>("text-sentence");
  const textProvenance = el<HTMLElement>("text-provenance");
  const playTextSkim = el<HTMLButtonElement>("play-text-skim");
  const historyList = el<HTMLElement>("history");
  const loadGenericButton = el<HTMLButtonElement>("load-generic");
  const genericStatus = el<HTMLElement>("generic-status");
  const genericBoard = el<HTMLElement>("generic-board");
  const genericSkimIntervals = el<HTMLElement>("generic-skim-intervals");
  const playGenericSkim = el<HTMLButtonElement>("play-generic-skim");
  const genericText = el<HTMLElement>("generic-text");

  // the raw full-length recording stays reachable next to every summary
  sessionLabel.textContent = `${session.id} — ${formatSeconds(session.meta.duration_s)} of video`;
  rawLink.href = session.meta.source_uri;
  video.src = session.meta.source_uri;

  const history: HistoryEntry[] = [];
  let busy = false;
  let player: SkimPlayer | null = null;
  let lastRequest: { text: string; modality: Modality } | null = null;

  const frameUrl = (locator: string) => api.frameUrl(session.id, locator);

  const setBusy = (value: boolean) => {
    busy = value;
    runButton.disabled = value;
    status.classList.toggle("spinner", value);
    if (value) {
      status.textContent = "running query…";
    }
  };

  const showError = (message: string) => {
    errorMessage.textContent = message;
    errorBox.classList.remove("hidden");
  };

  const clearError = () => {
    errorBox.classList.add("hidden");
    errorMessage.textContent = "";
  };

  const showSection = (name: keyof typeof sections | null) => {
    for (const [key, section] of Object.entries(sections)) {
      section.classList.toggle("hidden", key !== name);
    }
  };

  const renderLatency = (result: QueryResult) => {
    latencyList.replaceChildren();
    for (const [stage, seconds] of Object.entries(result.latency.stages)) {
      const item = doc.createElement("li");
      item.textContent = `${stage}: ${(seconds * 1000).toFixed(0)} ms`;
      latencyList.append(item);
    }
    const source = result.cached ? "cached" : "computed";
    status.textContent = `${source} ${result.modality} in ${formatSeconds(result.latency.total_s)}`;
  };

  const startSkim = (target: HTMLElement, skim: SkimDoc) => {
    player?.stop();
    const items = intervalList(target, skim);
    player = new SkimPlayer(video as IntervalVideo, skim.intervals, ({ intervalIndex }) => {
      items.forEach((item, i) => item.classList.toggle("playing", i === intervalIndex));
    });
    player.start();
  };

  const renderResult = (result: QueryResult) => {
    if (result.document.kind === "storyboard") {
      showSection("storyboard");
      renderStoryboard(resultBoard, (result.document as StoryboardDoc).entries, {
        layout: "row",
        frameUrl,
      });
    } else if (result.document.kind === "skim") {
      showSection("skim");
      startSkim(skimIntervals, result.document as SkimDoc);
    } else {
      showSection("text");
      const text = result.document as TextDoc;
      textSentence.textContent = text.text;
      intervalList(textProvenance, text.source_skim);
      playTextSkim.onclick = () => startSkim(textProvenance, text.source_skim);
    }
  };

  const renderHistory = () => {
    historyList.replaceChildren();
    history.forEach((entry, index) => {
      const item = doc.createElement("li");
      const button = doc.createElement("button");
      button.type = "button";
      button.textContent = `${entry.modality}: ${entry.text}${entry.cached ? " (cached)" : ""}`;
      button.addEventListener("click", () => void controller.rerun(index));
      item.append(button);
      historyList.append(item);
    });
  };

  const run = async (text: string, modality: Modality) => {
    if (busy) {
      return;
    }
    lastRequest = { text, modality };
    clearError();
    setBusy(true);
    try {
      const result = await api.runQuery(session.id, text, modality);
      renderLatency(result);
      renderResult(result);
      const existing = history.find((h) => h.text === text && h.modality === modality);
      if (existing) {
        existing.cached = result.cached;
      } else {
        history.unshift({ text, modality, cached: result.cached });
      }
      renderHistory();
    } catch (error) {
      if (error instanceof ApiError) {
        const suffix = error.role ? ` (role: ${error.role})` : "";
        showError(`${error.status}: ${error.message}${suffix}`);
        status.textContent = error.retryable ? "failed — worth retrying" : "failed";
      } else {
        showError(String(error));
        status.textContent = "failed";
      }
    } finally {
      setBusy(false);
    }
  };

  const controller: ConsoleController = {
    get busy() {
      return busy;
    },
    get history() {
      return history;
    },
    async submit() {
      await run(queryText.value, modalitySelect.value as Modality);
    },
    async rerun(index: number) {
      const entry = history[index];
      if (!entry) {
        return;
      }
      queryText.value = entry.text;
      modalitySelect.value = entry.modality;
      await run(entry.text, entry.modality);
    },
    async loadGeneric() {
      genericStatus.textContent = "building generic summary…";
      try {
        const generic = await api.runGeneric(session.id);
        const boardKey = generic.keys["storyboard"] ?? "generic-storyboard";
        const skimKey = generic.keys["skim"] ?? "generic-skim";
        const textKey = generic.keys["text"] ?? "generic-text";
        const board = await api.artifact(session.id, boardKey);
        renderStoryboard(genericBoard, (board.document as StoryboardDoc).entries, {
          layout: "grid",
          frameUrl,
        });
        const skim = await api.artifact(session.id, skimKey);
        const skimDoc = skim.document as SkimDoc;
        intervalList(genericSkimIntervals, skimDoc);
        playGenericSkim.onclick = () => startSkim(genericSkimIntervals, skimDoc);
        if (generic.text_available) {
          const text = await api.artifact(session.id, textKey);
          genericText.textContent = (text.document as TextDoc).text;
        } else {
          genericText.textContent = `no text summary: ${generic.text_error}`;
        }
        genericStatus.textContent =
          `${generic.storyboard_entries} key frames, ` +
          `${formatSeconds(generic.skim_total_s)} skim` +
          `${generic.cached ? " (cached)" : ""}`;
      } catch (error) {
        genericStatus.textContent =
          error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
      }
    },
  };

  runButton.addEventListener("click", () => void controller.submit());
  queryText.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") {
      void controller.submit();
    }
  });
  retryButton.addEventListener("click", () => {
    if (lastRequest) {
      void run(lastRequest.text, lastRequest.modality);
    }
  });
  playSkim.addEventListener("click", () => player?.start());
  loadGenericButton.addEventListener("click", () => void controller.loadGeneric());

  return controller;
}
