import { describe, expect, it } from "vitest";

import type { StoryboardEntryDoc } from "../src/api.js";
import { renderStoryboard } from "../src/storyboard.js";

const entry = (frame: number, ts: number): StoryboardEntryDoc => ({
  frame_index: frame,
  timestamp_s: ts,
  image_locator: `frames/query/${frame}`,
});

const frameUrl = (locator: string) => `http://svc/sessions/trip/${locator}`;

const render = (entries: StoryboardEntryDoc[], layout: "row" | "grid" = "row") => {
  const host = document.createElement("div");
  renderStoryboard(host, entries, { layout, frameUrl });
  return host;
};

describe("renderStoryboard", () => {
  it("renders exactly the manifest's entries, one cell per frame", () => {
    const entries = [entry(20, 20), entry(44, 44), entry(101, 101), entry(180, 180)];
    const host = render(entries);

    const cells = host.querySelectorAll(".board-cell");
    expect(cells).toHaveLength(4);
    const srcs = [...host.querySelectorAll("img")].map((img) => img.src);
    expect(srcs).toEqual([
      "http://svc/sessions/trip/frames/query/20",
      "http://svc/sessions/trip/frames/query/44",
      "http://svc/sessions/trip/frames/query/101",
      "http://svc/sessions/trip/frames/query/180",
    ]);
  });

  it("orders cells chronologically even when entries arrive shuffled", () => {
    const host = render([entry(101, 101), entry(20, 20), entry(180, 180), entry(44, 44)]);
    const captions = [...host.querySelectorAll(".board-timestamp")].map(
      (el) => el.textContent,
    );
    expect(captions).toEqual(["0:20", "0:44", "1:41", "3:00"]);
  });

  it("shows a timestamp under every frame", () => {
    const host = render([entry(0, 0), entry(3599, 3599), entry(3600, 3661.4)]);
    const captions = [...host.querySelectorAll(".board-timestamp")].map(
      (el) => el.textContent,
    );
    expect(captions).toEqual(["0:00", "59:59", "1:01:01"]);
  });

  it("never shows relevance scores, even if the document carries them", () => {
    const scored = [
      { ...entry(20, 20), score: 0.97 },
      { ...entry(44, 44), score: 0.41 },
    ];
    const host = render(scored);

    expect(host.innerHTML).not.toContain("0.97");
    expect(host.innerHTML).not.toContain("0.41");
    expect(host.innerHTML.toLowerCase()).not.toContain("score");
    for (const cell of host.querySelectorAll(".board-cell")) {
      // The timestamp is the only text a cell may carry.
      expect(cell.textContent?.trim()).toMatch(/^\d+:\d\d$/);
    }
  });

  it("uses a single row for query boards and a wrapping grid for generic boards", () => {
    const row = render([entry(1, 1)], "row");
    expect(row.classList.contains("board-row")).toBe(true);
    expect(row.classList.contains("board-grid")).toBe(false);

    const grid = render([entry(1, 1)], "grid");
    expect(grid.classList.contains("board-grid")).toBe(true);
    expect(grid.classList.contains("board-row")).toBe(false);
  });

  it("replaces previous content on re-render", () => {
    const host = document.createElement("div");
    renderStoryboard(host, [entry(1, 1), entry(2, 2)], { layout: "row", frameUrl });
    renderStoryboard(host, [entry(9, 9)], { layout: "row", frameUrl });
    expect(host.querySelectorAll(".board-cell")).toHaveLength(1);
  });

  it("labels images for accessibility with their timestamp", () => {
    const host = render([entry(20, 20)]);
    expect(host.querySelector("img")?.alt).toBe("frame at 0:20");
  });
});
