/**
 * HTML renderers. Pure string builders over API data: scores and badge
 * labels are taken verbatim from response fields, never recomputed.
 */

import type { ViewState } from "./state";
import type { RecommendationItem } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function formatScore(score: number): string {
  return score.toFixed(2);
}

export function renderBadges(item: RecommendationItem): string {
  return item.matched
    .map(
      (m) =>
        `<button class="badge" data-context="${escapeHtml(m.context)}" ` +
        `title="browse more papers focused on ${escapeHtml(m.context)}">` +
        `${escapeHtml(m.context)} ${formatScore(m.sim)}</button>`,
    )
    .join(" ");
}

export function renderItem(item: RecommendationItem): string {
  const title = item.title === null ? "(not in collection)" : item.title;
  const provenance = item.provenance.length
    ? `<span class="provenance">${item.provenance.map(escapeHtml).join(", ")}</span>`
    : "";
  return (
    `<li class="result" data-id="${escapeHtml(item.id)}">` +
    `<span class="result-title">${escapeHtml(title)}</span> ` +
    `<span class="result-id">${escapeHtml(item.id)}</span> ` +
    `<span class="score">${formatScore(item.score)}</span> ` +
    renderBadges(item) +
    provenance +
    `</li>`
  );
}

export function renderResults(items: RecommendationItem[]): string {
  if (items.length === 0) {
    return `<p class="empty">No recommendations for this view.</p>`;
  }
  return `<ul class="results">${items.map(renderItem).join("")}</ul>`;
}

export function renderToggles(state: ViewState): string {
  return state.contexts
    .map((context) => {
      const toggle = state.toggles[context] ?? "off";
      const symbol = toggle === "require" ? "+" : toggle === "exclude" ? "−" : "·";
      return (
        `<button class="toggle toggle-${toggle}" data-toggle="${escapeHtml(context)}">` +
        `${symbol} ${escapeHtml(context)}</button>`
      );
    })
    .join(" ");
}

export function renderTrail(state: ViewState): string {
  const steps = state.trail
    .map((crumb) => {
      const mode =
        crumb.mode.kind === "focused"
          ? `focused:${crumb.mode.context}`
          : crumb.mode.kind;
      return `<span class="crumb">${escapeHtml(crumb.seed)} (${escapeHtml(mode)})</span>`;
    })
    .join(" › ");
  const back = state.trail.length
    ? `<button id="back">← back</button> `
    : "";
  return `<nav class="trail">${back}${steps}</nav>`;
}

export function renderView(state: ViewState): string {
  const heading =
    state.seed === null
      ? `<h1>Related papers explorer</h1>`
      : `<h1>${escapeHtml(state.seedTitle ?? state.seed)}</h1>` +
        `<p class="seed-id">seed: ${escapeHtml(state.seed)}</p>`;
  const modeLabel =
    state.mode.kind === "focused"
      ? `focused on ${escapeHtml(state.mode.context)}`
      : state.mode.kind;
  const queryDisabled = Object.values(state.toggles).some((t) => t !== "off")
    ? ""
    : "disabled";
  const status = state.loading
    ? `<p class="loading">loading…</p>`
    : state.error !== null
      ? `<p class="error">${escapeHtml(state.error)}</p>`
      : state.toast !== null
        ? `<p class="toast">${escapeHtml(state.toast)}</p>`
        : "";
  const body = state.loading || state.error !== null ? "" : renderResults(state.items);
  return (
    renderTrail(state) +
    heading +
    `<p class="mode">${modeLabel}</p>` +
    `<div class="toggles">${renderToggles(state)} ` +
    `<button id="run-query" ${queryDisabled}>query</button></div>` +
    status +
    body
  );
}
