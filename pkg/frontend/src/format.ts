/** Small display helpers shared by the console views. */

/** Seconds → "m:ss" (or "h:mm:ss" past an hour), for timestamp captions. */
export const formatTimestamp = (seconds: number): string => {
  const whole = Math.max(0, Math.round(seconds));
  const h = Math.floor(whole / 3600);
  const m = Math.floor((whole % 3600) / 60);
  const s = whole % 60;
  const mmss = `${m}:${String(s).padStart(2, "0")}`;
  return h > 0 ? `${h}:${String(m).padStart(2, "0")}:${String(s).padStart(2, "0")}` : mmss;
};

/** Seconds → "12.3 s", for durations and latency stages. */
export const formatSeconds = (seconds: number): string => `${seconds.toFixed(1)} s`;

/** An interval → "0:20–0:28". */
export const formatInterval = (startS: number, endS: number): string =>
  `${formatTimestamp(startS)}–${formatTimestamp(endS)}`;
