import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { FakeServer } from "./fake_server";

function setup() {
  const server = new FakeServer();
  server.addPart(1, 1, ["runA", "runB"]);
  return { server, api: new ApiClient("", server.fetch) };
}

describe("rating submission", () => {
  it("accepts an in-range score", async () => {
    const { server, api } = setup();
    const result = await api.postRating({
      rater_id: "r1", run_id: "runA", session: 1, part: 1, position: 0, score: 5,
    });
    expect(result.ok).toBe(true);
    expect(server.journal).toHaveLength(1);
  });

  it("rejects score 6 with a validation error", async () => {
    const { server, api } = setup();
    const attempt = api.postRating({
      rater_id: "r1", run_id: "runA", session: 1, part: 1, position: 0, score: 6,
    });
    await expect(attempt).rejects.toMatchObject({ status: 422 });
    expect(server.journal).toHaveLength(0);
  });

  it("rejects a duplicate with a conflict", async () => {
    const { api } = setup();
    const body = { rater_id: "r1", run_id: "runA", session: 1, part: 1, position: 0, score: 3 };
    await api.postRating(body);
    await expect(api.postRating({ ...body, score: 4 })).rejects.toMatchObject({ status: 409 });
  });
});

describe("fetch plumbing", () => {
  it("returns playlists in server order", async () => {
    const { api } = setup();
    const playlist = await api.getPlaylist(1, 1, "r1");
    expect(playlist.items.map((i) => i.run_id)).toEqual(["runA", "runB"]);
    expect(playlist.items.map((i) => i.position)).toEqual([0, 1]);
  });

  it("surfaces 404s as ApiError", async () => {
    const { api } = setup();
    await expect(api.getPlaylist(9, 9, "r1")).rejects.toMatchObject({ status: 404 });
  });

  it("wraps network failures with status 0", async () => {
    const api = new ApiClient("", () => Promise.reject(new Error("down")));
    await expect(api.getProgress("r1")).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.status === 0,
    );
  });
});
