/**
 * View state and its pure transitions.
 *
 * A context toggle cycles off -> require -> exclude -> off, so a context
 * can never be required and excluded at once. Every shown result list is
 * the last successful API response; a breadcrumb trail of past views
 * supports back navigation, and a monotonically increasing request
 * sequence number discards stale responses.
 */

import type { RecommendationItem } from "./types";

export type ToggleState = "off" | "require" | "exclude";

export type ViewMode =
  | { kind: "diverse" }
  | { kind: "focused"; context: string }
  | { kind: "analogical" };

export interface Breadcrumb {
  seed: string;
  mode: ViewMode;
  toggles: Record<string, ToggleState>;
  items: RecommendationItem[];
}

export interface ViewState {
  seed: string | null;
  seedTitle: string | null;
  mode: ViewMode;
  contexts: string[];
  toggles: Record<string, ToggleState>;
  items: RecommendationItem[];
  trail: Breadcrumb[];
  loading: boolean;
  /** Inline failure state that replaces the result list (e.g. unknown seed). */
  error: string | null;
  /** Transient message shown above a retained result list. */
  toast: string | null;
  requestSeq: number;
}

export function initialState(): ViewState {
  return {
    seed: null,
    seedTitle: null,
    mode: { kind: "diverse" },
    contexts: [],
    toggles: {},
    items: [],
    trail: [],
    loading: false,
    error: null,
    toast: null,
    requestSeq: 0,
  };
}

export function cycleToggle(state: ToggleState): ToggleState {
  switch (state) {
    case "off":
      return "require";
    case "require":
      return "exclude";
    case "exclude":
      return "off";
  }
}

export function toggleContext(state: ViewState, context: string): void {
  state.toggles[context] = cycleToggle(state.toggles[context] ?? "off");
}

export function requiredContexts(state: ViewState): string[] {
  return state.contexts.filter((c) => state.toggles[c] === "require");
}

export function excludedContexts(state: ViewState): string[] {
  return state.contexts.filter((c) => state.toggles[c] === "exclude");
}

export function anyToggleActive(state: ViewState): boolean {
  return requiredContexts(state).length + excludedContexts(state).length > 0;
}

export function nextRequest(state: ViewState): number {
  state.requestSeq += 1;
  return state.requestSeq;
}

/** True when this response is still the latest one the view asked for. */
export function isCurrent(state: ViewState, seq: number): boolean {
  return state.requestSeq === seq;
}

export function pushBreadcrumb(state: ViewState): void {
  if (state.seed === null) {
    return;
  }
  state.trail.push({
    seed: state.seed,
    mode: state.mode,
    toggles: { ...state.toggles },
    items: state.items,
  });
}

/** Restore the previous view; returns false when the trail is empty. */
export function popBreadcrumb(state: ViewState): boolean {
  const previous = state.trail.pop();
  if (previous === undefined) {
    return false;
  }
  state.seed = previous.seed;
  state.mode = previous.mode;
  state.toggles = { ...previous.toggles };
  state.items = previous.items;
  state.error = null;
  return true;
}
