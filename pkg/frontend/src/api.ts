import type {
  FlowMapPayload,
  GraphPayload,
  LayoutPayload,
  RatioPayload,
  SurveyPayload,
  SurveyResponse,
  SurveyStats,
  ViewpointsPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

// Thin typed client over the bundle API. Injectable fetch so tests can run
// against a canned service; no caching, every call is a fresh request.
export class ServiceClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) {
      throw new ServiceError(`GET ${path} failed`, response.status);
    }
    return (await response.json()) as T;
  }

  fetchGraph(percentile: number, mode: "above" | "below"): Promise<GraphPayload> {
    return this.getJson(`/api/graph?percentile=${percentile}&mode=${mode}`);
  }

  fetchLayout(): Promise<LayoutPayload> {
    return this.getJson("/api/layout");
  }

  async recomputeLayout(seed: number): Promise<LayoutPayload> {
    const response = await this.fetchFn(`${this.baseUrl}/api/layout`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seed }),
    });
    if (!response.ok) {
      throw new ServiceError("POST /api/layout failed", response.status);
    }
    return (await response.json()) as LayoutPayload;
  }

  fetchFlows(): Promise<FlowMapPayload> {
    return this.getJson("/api/flows");
  }

  fetchViewpoints(): Promise<ViewpointsPayload> {
    return this.getJson("/api/viewpoints");
  }

  fetchSurvey(): Promise<SurveyPayload> {
    return this.getJson("/api/survey");
  }

  fetchRatio(selector: "all" | "accepted" = "all"): Promise<RatioPayload> {
    return this.getJson(`/api/ratio?selector=${selector}`);
  }

  async submitResponses(responses: SurveyResponse[]): Promise<SurveyStats> {
    const response = await this.fetchFn(`${this.baseUrl}/api/survey/responses`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ responses }),
    });
    if (!response.ok) {
      throw new ServiceError("POST /api/survey/responses failed", response.status);
    }
    const body = (await response.json()) as { stats: SurveyStats };
    return body.stats;
  }
}
