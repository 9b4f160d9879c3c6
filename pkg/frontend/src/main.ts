/**
 * Bootstrap: pick the session, build the API client, wire the console.
 *
 * The service origin and session come from the query string (`?api=` and
 * `?session=`), defaulting to same-origin and the first session the service
 * lists — so a refresh reconstructs everything from the URL plus service
 * state alone.
 */

import { SummaryApi } from "./api.js";
import { wireConsole } from "./console.js";

const bootstrap = async (): Promise<void> => {
  const params = new URLSearchParams(window.location.search);
  const api = new SummaryApi(params.get("api") ?? "");

  let sessionId = params.get("session");
  if (!sessionId) {
    const health = await api.health();
    sessionId = health.sessions[0] ?? null;
  }
  const label = document.getElementById("session-label");
  if (!sessionId) {
    if (label) {
      label.textContent = "no sessions ingested yet";
    }
    return;
  }
  const session = await api.session(sessionId);
  wireConsole(document, api, session);
};

window.addEventListener("DOMContentLoaded", () => {
  void bootstrap().catch((error) => {
    const label = document.getElementById("session-label");
    if (label) {
      label.textContent = `failed to reach the service: ${error}`;
    }
  });
});
