/** Mocked fetch over the micro corpus the backend tests also use. */

import type { RecommendationItem } from "../src/types";

export interface RecordedCall {
  url: string;
  method: string;
  body?: unknown;
}

export const CORTES: RecommendationItem = {
  id: "cortes1995",
  title: "Support vector networks for supervised classification",
  score: 0.73,
  matched: [{ context: "method", sim: 0.73 }],
  provenance: ["annotation"],
};

export const FARBER: RecommendationItem = {
  id: "farber2019",
  title: "A linked scholarly knowledge graph of publications, authors, and venues",
  score: 0.41,
  matched: [{ context: "resource", sim: 0.41 }],
  provenance: ["annotation", "citation-context"],
};

const ZHAO_DOC = {
  id: "zhao2013",
  title: "Collective author name disambiguation for scholarly databases",
  sections: [{ heading: "Introduction", paragraphs: [["Author name ambiguity."]] }],
};

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export type Routes = Record<string, (call: RecordedCall) => Response | Promise<Response>>;

/**
 * A fetch stub with call recording. Route keys are matched as substrings
 * of `METHOD url`; the first match wins, later keys override defaults.
 */
export function mockApi(overrides: Routes = {}) {
  const calls: RecordedCall[] = [];
  const defaults: Routes = {
    "GET /contexts": () => json({ contexts: ["method", "resource"] }),
    "GET /documents/zhao2013/recommendations": (call) => {
      if (call.url.includes("mode=focused") && call.url.includes("context=method")) {
        return json({
          seed: "zhao2013",
          mode: "focused",
          context: "method",
          k: 10,
          items: [CORTES],
        });
      }
      return json({
        seed: "zhao2013",
        mode: "diverse",
        context: null,
        k: 10,
        items: [CORTES, FARBER],
      });
    },
    "GET /documents/zhao2013": () => json(ZHAO_DOC),
    "GET /documents/missing": () =>
      json({ code: "unknown_document", message: "no document 'missing'" }, 404),
    "POST /query": () =>
      json({
        query: {
          seed: "zhao2013",
          require: ["resource"],
          exclude: ["method"],
          k: 10,
          tau_sim: 0.5,
          tau_dis: 0.2,
        },
        items: [FARBER],
      }),
  };
  const routes = { ...defaults, ...overrides };

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const call: RecordedCall = {
      url,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    };
    calls.push(call);
    for (const [pattern, handler] of Object.entries(routes)) {
      if (`${method} ${url}`.includes(pattern)) {
        return handler(call);
      }
    }
    return json({ code: "internal", message: `unrouted: ${method} ${url}` }, 500);
  };

  return { fetchFn, calls };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
