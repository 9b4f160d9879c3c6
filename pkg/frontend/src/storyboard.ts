/**
 * Storyboard rendering: chronological key frames, each captioned with its
 * timestamp. The timestamp is the only annotation a cell carries — the
 * service's ranking information never reaches the DOM.
 */

import type { StoryboardEntryDoc } from "./api.js";
import { formatTimestamp } from "./format.js";

export interface StoryboardOptions {
  /** "row": every entry in one non-scrolling row (query boards, ≤4 entries).
   *  "grid": a scrollable grid (generic boards, up to 24 entries). */
  layout: "row" | "grid";
  /** Maps an entry's image locator to a fetchable URL. */
  frameUrl: (imageLocator: string) => string;
}

/**
 * Replaces `container`'s content with one cell per entry, in chronological
 * order regardless of input order.
 */
export function renderStoryboard(
  container: HTMLElement,
  entries: StoryboardEntryDoc[],
  options: StoryboardOptions,
): void {
  const ordered = [...entries].sort((a, b) => a.timestamp_s - b.timestamp_s);
  container.classList.remove("board-row", "board-grid");
  container.classList.add("board", options.layout === "row" ? "board-row" : "board-grid");
  container.replaceChildren();
  for (const entry of ordered) {
    const cell = document.createElement("figure");
    cell.className = "board-cell";

    const img = document.createElement("img");
    img.src = options.frameUrl(entry.image_locator);
    img.alt = `frame at ${formatTimestamp(entry.timestamp_s)}`;
    img.loading = "lazy";

    const caption = document.createElement("figcaption");
    caption.className = "board-timestamp";
    caption.textContent = formatTimestamp(entry.timestamp_s);

    cell.append(img, caption);
    container.append(cell);
  }
}
