/** Wire types of the recommendation API. */

export interface MatchedContext {
  context: string;
  sim: number;
}

export interface RecommendationItem {
  id: string;
  title: string | null;
  score: number;
  matched: MatchedContext[];
  provenance: string[];
}

export interface RecommendationsResponse {
  seed: string;
  mode: string;
  context: string | null;
  k: number;
  items: RecommendationItem[];
}

export interface QueryRequest {
  seed: string;
  require: string[];
  exclude: string[];
  k?: number;
  tau_sim?: number;
  tau_dis?: number;
}

export interface QueryResponse {
  query: {
    seed: string;
    require: string[];
    exclude: string[];
    k: number;
    tau_sim: number;
    tau_dis: number;
  };
  items: RecommendationItem[];
}

export interface DocumentRecord {
  id: string;
  title: string;
  sections: { heading: string; paragraphs: string[][] }[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
