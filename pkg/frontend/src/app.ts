/**
 * Explorer controller: wires the API client, view state, and renderer.
 *
 * Navigation model: a seed page shows diverse recommendations with one
 * badge per matched context; clicking a badge narrows to focused results
 * for that context; +/- toggles compose an analogical query. Every step
 * pushes a breadcrumb so the user's next move builds on the last one.
 */

import { ApiClient, ApiError } from "./api";
import {
  anyToggleActive,
  excludedContexts,
  initialState,
  isCurrent,
  nextRequest,
  popBreadcrumb,
  pushBreadcrumb,
  requiredContexts,
  toggleContext,
  type ViewState,
} from "./state";
import { renderView } from "./render";

export class ExplorerApp {
  readonly state: ViewState;
  private root: HTMLElement | null = null;

  constructor(
    private api: ApiClient,
    private resultsPerView = 10,
  ) {
    this.state = initialState();
  }

  async start(seed?: string): Promise<void> {
    const { contexts } = await this.api.getContexts();
    this.state.contexts = contexts;
    for (const context of contexts) {
      this.state.toggles[context] = this.state.toggles[context] ?? "off";
    }
    if (seed) {
      await this.showSeed(seed);
    } else {
      this.render();
    }
  }

  /** Load a seed document and its diverse recommendations. */
  async showSeed(id: string): Promise<void> {
    if (this.state.seed !== null) {
      pushBreadcrumb(this.state);
    }
    const seq = nextRequest(this.state);
    this.state.loading = true;
    this.state.error = null;
    this.state.toast = null;
    this.render();
    try {
      const doc = await this.api.getDocument(id);
      const recommendations = await this.api.getRecommendations(
        id,
        "diverse",
        undefined,
        this.resultsPerView,
      );
      if (!isCurrent(this.state, seq)) {
        return; // a newer request superseded this one
      }
      this.state.seed = id;
      this.state.seedTitle = doc.title;
      this.state.mode = { kind: "diverse" };
      this.state.items = recommendations.items;
      this.state.loading = false;
    } catch (error) {
      if (!isCurrent(this.state, seq)) {
        return;
      }
      this.state.loading = false;
      this.state.items = [];
      this.state.error =
        error instanceof ApiError && error.status === 404
          ? `document not found: ${id}`
          : `request failed: ${String(error instanceof Error ? error.message : error)}`;
    }
    this.render();
  }

  /** Badge click: browse more papers focused on one context. */
  async clickBadge(context: string): Promise<void> {
    if (this.state.seed === null) {
      return;
    }
    const seed = this.state.seed;
    pushBreadcrumb(this.state);
    const seq = nextRequest(this.state);
    this.state.loading = true;
    this.render();
    try {
      const response = await this.api.getRecommendations(
        seed,
        "focused",
        context,
        this.resultsPerView,
      );
      if (!isCurrent(this.state, seq)) {
        return;
      }
      this.state.mode = { kind: "focused", context };
      this.state.items = response.items;
      this.state.loading = false;
      this.state.error = null;
      this.state.toast = null;
    } catch (error) {
      if (!isCurrent(this.state, seq)) {
        return;
      }
      // keep the previous list: undo the breadcrumb and surface a toast
      popBreadcrumb(this.state);
      this.state.loading = false;
      this.state.toast = `could not load ${context} recommendations: ${
        error instanceof Error ? error.message : String(error)
      }`;
    }
    this.render();
  }

  /** Run the analogical query composed from the +/- toggles. */
  async composeQuery(): Promise<void> {
    if (this.state.seed === null || !anyToggleActive(this.state)) {
      return;
    }
    const seed = this.state.seed;
    const require = requiredContexts(this.state);
    const exclude = excludedContexts(this.state);
    pushBreadcrumb(this.state);
    const seq = nextRequest(this.state);
    this.state.loading = true;
    this.render();
    try {
      const response = await this.api.postQuery({
        seed,
        require,
        exclude,
        k: this.resultsPerView,
      });
      if (!isCurrent(this.state, seq)) {
        return;
      }
      this.state.mode = { kind: "analogical" };
      this.state.items = response.items;
      this.state.loading = false;
      this.state.error = null;
      this.state.toast = null;
    } catch (error) {
      if (!isCurrent(this.state, seq)) {
        return;
      }
      popBreadcrumb(this.state);
      this.state.loading = false;
      this.state.toast =
        error instanceof ApiError && (error.status === 400 || error.status === 422)
          ? `invalid query: ${error.message}`
          : `query failed: ${error instanceof Error ? error.message : String(error)}`;
    }
    this.render();
  }

  toggle(context: string): void {
    toggleContext(this.state, context);
    this.render();
  }

  goBack(): void {
    if (popBreadcrumb(this.state)) {
      this.render();
    }
  }

  mount(root: HTMLElement): void {
    this.root = root;
    root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const badge = target.closest<HTMLElement>(".badge");
      if (badge?.dataset.context) {
        void this.clickBadge(badge.dataset.context);
        return;
      }
      const toggle = target.closest<HTMLElement>(".toggle");
      if (toggle?.dataset.toggle) {
        this.toggle(toggle.dataset.toggle);
        return;
      }
      if (target.closest("#run-query")) {
        void this.composeQuery();
        return;
      }
      if (target.closest("#back")) {
        this.goBack();
        return;
      }
      const result = target.closest<HTMLElement>(".result");
      if (result?.dataset.id) {
        void this.showSeed(result.dataset.id);
      }
    });
    this.render();
  }

  render(): void {
    if (this.root !== null) {
      this.root.innerHTML = renderView(this.state);
    }
  }
}
