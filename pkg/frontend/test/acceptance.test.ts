// @vitest-environment jsdom
//
// Release criteria for the rating UI, in one place:
//   1. the submit control is absent at 9.9 s of playback and present at 10.0 s
//   2. a POST with score 6 is rejected by the backend contract
//   3. completing 2 sessions x 4 parts journals exactly the playlist total,
//      order-consistent with the playlists
import { afterAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { SessionController } from "../src/session";
import { render } from "../src/view";
import { FakeServer } from "./fake_server";

const results: string[] = [];

afterAll(() => {
  for (const line of results) console.log(line);
});

function fullServer(): FakeServer {
  const server = new FakeServer();
  let n = 0;
  for (const session of [1, 2]) {
    for (const part of [1, 2, 3, 4]) {
      server.addPart(session, part, [`run${n++}`, `run${n++}`], session === 1 && part === 1);
    }
  }
  return server;
}

describe("rating UI acceptance", () => {
  it("gates the submit control at exactly 10 s of playback", async () => {
    const server = fullServer();
    const ctrl = new SessionController(new ApiClient("", server.fetch), "rater");
    const root = document.createElement("div");
    await ctrl.init();
    await ctrl.openPart(1, 1);

    ctrl.player!.tick(9.9);
    render(root, ctrl);
    expect(root.querySelector("#submit-rating")).toBeNull();

    ctrl.player!.tick(0.1);
    render(root, ctrl);
    expect(root.querySelector("#submit-rating")).not.toBeNull();
    expect(root.querySelectorAll("#acr-menu .acr-choice")).toHaveLength(5);
    results.push("[PASS] rating gate: submit absent at 9.9 s, present at 10.0 s");
  });

  it("sees score 6 refused by the backend", async () => {
    const server = fullServer();
    const api = new ApiClient("", server.fetch);
    await expect(
      api.postRating({ rater_id: "r", run_id: "run0", session: 1, part: 1, position: 0, score: 6 }),
    ).rejects.toMatchObject({ status: 422 });
    expect(server.journal).toHaveLength(0);
    results.push("[PASS] rating gate: POST of score 6 rejected");
  });

  it("journals exactly the playlist total across 2 sessions x 4 parts, in order", async () => {
    const server = fullServer();
    const ctrl = new SessionController(new ApiClient("", server.fetch), "rater");
    await ctrl.init();
    await ctrl.continueNextPart();
    let guard = 0;
    while (ctrl.screen !== "all-complete" && guard++ < 64) {
      if (ctrl.screen === "item") {
        ctrl.player!.tick(10.2);
        ctrl.selectScore((guard % 5) + 1);
        await ctrl.submit();
      } else {
        await ctrl.continueNextPart();
      }
    }
    expect(ctrl.screen).toBe("all-complete");
    expect(server.journal).toHaveLength(server.totalItems);
    for (const [key, playlist] of server.playlists.entries()) {
      const [session, part] = key.split("/").map(Number);
      const posted = server.journal.filter((r) => r.session === session && r.part === part);
      expect(posted.map((r) => r.run_id)).toEqual(playlist.items);
    }
    results.push(
      "[PASS] rating gate: 2x4 completion journals the playlist total, order-consistent",
    );
  });
});
