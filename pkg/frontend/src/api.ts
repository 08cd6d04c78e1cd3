/**
 * Thin typed client for the recommendation API.
 *
 * The UI never computes similarity itself: every score it shows comes out
 * of these responses untouched.
 */

import type {
  DocumentRecord,
  QueryRequest,
  QueryResponse,
  RecommendationsResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "internal";
      let message = `request failed with status ${response.status}`;
      try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  getContexts(): Promise<{ contexts: string[] }> {
    return this.request("/contexts");
  }

  getDocument(id: string): Promise<DocumentRecord> {
    return this.request(`/documents/${encodeURIComponent(id)}`);
  }

  getRecommendations(
    seed: string,
    mode: "diverse" | "focused",
    context?: string,
    k = 10,
  ): Promise<RecommendationsResponse> {
    const params = new URLSearchParams({ mode, k: String(k) });
    if (context !== undefined) {
      params.set("context", context);
    }
    return this.request(
      `/documents/${encodeURIComponent(seed)}/recommendations?${params}`,
    );
  }

  postQuery(body: QueryRequest): Promise<QueryResponse> {
    return this.request("/query", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
