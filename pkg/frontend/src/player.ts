/**
 * Skim playback over the raw source video: an edit list of (start, end)
 * second intervals is played in order on one video element, seeking past
 * everything the summary left out. No re-encoded skim file is involved —
 * the player just steers the full-length recording.
 */

import type { SkimIntervalDoc } from "./api.js";

/** The slice of HTMLVideoElement the player drives (fakeable in tests). */
export interface IntervalVideo {
  currentTime: number;
  play(): unknown;
  pause(): void;
  addEventListener(type: string, listener: () => void): void;
  removeEventListener(type: string, listener: () => void): void;
}

export interface SkimPlayerState {
  /** Index of the interval now playing, or -1 when idle/finished. */
  intervalIndex: number;
  done: boolean;
}

/** How close to an interval's end counts as having reached it, in seconds. */
const END_EPSILON_S = 0.05;

export class SkimPlayer {
  private readonly video: IntervalVideo;
  private readonly intervals: SkimIntervalDoc[];
  private readonly onUpdate: (state: SkimPlayerState) => void;
  private index = -1;
  private finishedFlag = false;
  private listening = false;

  constructor(
    video: IntervalVideo,
    intervals: SkimIntervalDoc[],
    onUpdate: (state: SkimPlayerState) => void = () => {},
  ) {
    let previousEnd = -Infinity;
    for (const { start_s, end_s } of intervals) {
      if (end_s <= start_s || start_s < previousEnd) {
        throw new Error("edit list intervals must be chronological and disjoint");
      }
      previousEnd = end_s;
    }
    this.video = video;
    this.intervals = intervals;
    this.onUpdate = onUpdate;
  }

  get intervalIndex(): number {
    return this.index;
  }

  get finished(): boolean {
    return this.finishedFlag;
  }

  /** Seek to the first interval and play; a no-op for an empty edit list. */
  start(): void {
    this.finishedFlag = false;
    if (this.intervals.length === 0) {
      this.finish();
      return;
    }
    if (!this.listening) {
      this.video.addEventListener("timeupdate", this.handleTimeUpdate);
      this.listening = true;
    }
    this.enter(0);
    this.video.play();
  }

  /** Pause where we are and stop steering the element. */
  stop(): void {
    if (this.listening) {
      this.video.removeEventListener("timeupdate", this.handleTimeUpdate);
      this.listening = false;
    }
    this.index = -1;
    this.video.pause();
  }

  private enter(index: number): void {
    this.index = index;
    const interval = this.intervals[index];
    if (interval) {
      this.video.currentTime = interval.start_s;
      this.onUpdate({ intervalIndex: index, done: false });
    }
  }

  private finish(): void {
    if (this.listening) {
      this.video.removeEventListener("timeupdate", this.handleTimeUpdate);
      this.listening = false;
    }
    this.index = -1;
    this.finishedFlag = true;
    this.video.pause();
    this.onUpdate({ intervalIndex: -1, done: true });
  }

  private handleTimeUpdate = (): void => {
    if (this.index < 0) {
      return;
    }
    const current = this.intervals[this.index];
    if (!current || this.video.currentTime < current.end_s - END_EPSILON_S) {
      return;
    }
    if (this.index + 1 < this.intervals.length) {
      this.enter(this.index + 1);
    } else {
      this.finish();
    }
  };
}
