// Thin typed client over the engine's JSON routes. Every request flows
// through one transport function so tests can substitute a fake and record
// the exact call sequence; the real transport is window.fetch.

import type {
  InterestEntry,
  InterestList,
  MagazinePageResponse,
  Recommendation,
  Registered,
  SavedRow,
  SharePayload,
} from "./types.js";

export interface ApiRequest {
  method: "GET" | "POST" | "PUT" | "DELETE";
  path: string;
  body?: unknown;
}

export interface ApiResponse {
  status: number;
  body: unknown;
}

export type Transport = (request: ApiRequest, token: string | null) => Promise<ApiResponse>;

export class ApiCallError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export function fetchTransport(baseUrl: string): Transport {
  return async (request, token) => {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (token) headers["authorization"] = `Bearer ${token}`;
    const response = await fetch(baseUrl + request.path, {
      method: request.method,
      headers,
      body: request.body === undefined ? undefined : JSON.stringify(request.body),
    });
    return { status: response.status, body: await response.json() };
  };
}

export class ApiClient {
  token: string | null = null;
  private requestLog: ApiRequest[] = [];

  constructor(private transport: Transport) {}

  /** Chronological record of every call made; tests assert on this. */
  calls(): readonly ApiRequest[] {
    return this.requestLog;
  }

  private async call<T>(request: ApiRequest): Promise<T> {
    this.requestLog.push(request);
    const response = await this.transport(request, this.token);
    if (response.status >= 400) {
      const body = response.body as { error?: { message?: string } } | null;
      throw new ApiCallError(response.status, body?.error?.message ?? `HTTP ${response.status}`);
    }
    return response.body as T;
  }

  async register(email: string): Promise<Registered> {
    const made = await this.call<Registered>({ method: "POST", path: "/users", body: { email } });
    this.token = made.token;
    return made;
  }

  importProfile(userId: string, doc: { likes: string[]; posts?: string[]; professional?: string[] }) {
    return this.call<{ user_id: string; imported: InterestEntry[] }>({
      method: "POST",
      path: `/users/${userId}/profile-import`,
      body: doc,
    });
  }

  magazine(userId: string, page: number, pageSize: number): Promise<MagazinePageResponse> {
    return this.call({
      method: "GET",
      path: `/users/${userId}/magazine?page=${page}&page_size=${pageSize}`,
    });
  }

  interests(userId: string): Promise<InterestList> {
    return this.call({ method: "GET", path: `/users/${userId}/interests` });
  }

  putInterest(userId: string, keyword: string, weight: number): Promise<InterestEntry> {
    return this.call({
      method: "PUT",
      path: `/users/${userId}/interests/${encodeURIComponent(keyword)}`,
      body: { weight },
    });
  }

  deleteInterest(userId: string, keyword: string): Promise<{ keyword: string; deleted: boolean }> {
    return this.call({
      method: "DELETE",
      path: `/users/${userId}/interests/${encodeURIComponent(keyword)}`,
    });
  }

  recommendations(userId: string): Promise<{ recommendations: Recommendation[] }> {
    return this.call({ method: "GET", path: `/users/${userId}/recommendations` });
  }

  saved(userId: string, sort: "saved_at" | "publish_date"): Promise<{ saved: SavedRow[] }> {
    return this.call({ method: "GET", path: `/users/${userId}/saved?sort=${sort}` });
  }

  saveContent(userId: string, contentId: string): Promise<{ content_id: string; saved_at: string; created: boolean }> {
    return this.call({
      method: "POST",
      path: `/users/${userId}/saved`,
      body: { content_id: contentId },
    });
  }

  unsaveContent(userId: string, contentId: string): Promise<{ removed: boolean }> {
    return this.call({ method: "DELETE", path: `/users/${userId}/saved/${contentId}` });
  }

  rate(contentId: string, value: number): Promise<{ content_id: string; value: number }> {
    return this.call({ method: "POST", path: `/contents/${contentId}/rating`, body: { value } });
  }

  share(contentId: string, channel: string): Promise<{ payload: SharePayload }> {
    return this.call({ method: "POST", path: `/contents/${contentId}/share`, body: { channel } });
  }

  postEvent(kind: string, target: string, value?: number): Promise<{ applied: boolean }> {
    const body: Record<string, unknown> = { kind, target };
    if (value !== undefined) body["value"] = value;
    return this.call({ method: "POST", path: "/events", body });
  }

  progress(userId: string): Promise<{ percent: number }> {
    return this.call({ method: "GET", path: `/users/${userId}/progress` });
  }
}
