import { Playlist, Progress, RatingSubmission, RunManifest } from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the testbed's rating-session API.  All state lives
 * on the server; the client only shuttles JSON.
 */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && body.detail) detail = JSON.stringify(body.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getPlaylist(session: number, part: number, raterId: string): Promise<Playlist> {
    const q = encodeURIComponent(raterId);
    return this.request<Playlist>(`/sessions/${session}/parts/${part}/playlist?rater_id=${q}`);
  }

  getManifest(manifestUrl: string): Promise<RunManifest> {
    return this.request<RunManifest>(manifestUrl);
  }

  getProgress(raterId: string): Promise<Progress> {
    return this.request<Progress>(`/progress/${encodeURIComponent(raterId)}`);
  }

  postRating(submission: RatingSubmission): Promise<{ ok: boolean }> {
    return this.request<{ ok: boolean }>("/ratings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(submission),
    });
  }
}
