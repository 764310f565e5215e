// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { SessionController } from "../src/session";
import { render } from "../src/view";
import { FakeServer } from "./fake_server";

let server: FakeServer;
let ctrl: SessionController;
let root: HTMLElement;

beforeEach(async () => {
  server = new FakeServer();
  server.addPart(1, 1, ["run00", "run01"], true);
  server.addPart(1, 2, ["run02"]);
  ctrl = new SessionController(new ApiClient("", server.fetch), "alice");
  root = document.createElement("div");
  document.body.replaceChildren(root);
  await ctrl.init();
});

describe("rating controls visibility", () => {
  it("hides the submit control at 9.9 s and shows it at 10.0 s", async () => {
    await ctrl.openPart(1, 1);
    ctrl.player!.tick(9.9);
    render(root, ctrl);
    expect(root.querySelector("#submit-rating")).toBeNull();
    expect(root.querySelector("#acr-menu")).toBeNull();
    expect(root.textContent).toContain("rating opens after the first 10 seconds");

    ctrl.player!.tick(0.1);
    render(root, ctrl);
    expect(root.querySelector("#submit-rating")).not.toBeNull();
    const choices = root.querySelectorAll("#acr-menu .acr-choice");
    expect(choices).toHaveLength(5); // the 5-point ACR menu
    const labels = [...choices].map((c) => c.textContent);
    expect(labels[0]).toContain("Excellent");
    expect(labels[4]).toContain("Bad");
  });

  it("disables submit until a score is selected", async () => {
    await ctrl.openPart(1, 1);
    ctrl.player!.tick(10.0);
    render(root, ctrl);
    const submit = root.querySelector<HTMLButtonElement>("#submit-rating")!;
    expect(submit.disabled).toBe(true);
    ctrl.selectScore(4);
    render(root, ctrl);
    expect(root.querySelector<HTMLButtonElement>("#submit-rating")!.disabled).toBe(false);
  });
});

describe("screens", () => {
  it("shows the top bar with rated-of-total on the item screen", async () => {
    await ctrl.openPart(1, 1);
    render(root, ctrl);
    expect(root.querySelector("#top-bar")!.textContent).toContain("rated 0 of 3");
  });

  it("renders playlist-ordered timeline cells for the current item", async () => {
    await ctrl.openPart(1, 1);
    render(root, ctrl);
    expect(root.querySelectorAll(".timeline.video .cell").length).toBeGreaterThan(0);
    expect(root.querySelectorAll(".timeline.audio .cell").length).toBeGreaterThan(0);
  });

  it("shows a retry prompt on media failure", async () => {
    server.failManifests.add("run00");
    await ctrl.openPart(1, 1);
    render(root, ctrl);
    expect(root.querySelector("#retry")).not.toBeNull();
    expect(root.querySelector("#banner")!.textContent).toContain("could not load media");
  });

  it("renders part-complete instructions and the completion screen", async () => {
    await ctrl.openPart(1, 1);
    for (const score of [3, 4]) {
      ctrl.player!.tick(10.5);
      ctrl.selectScore(score);
      await ctrl.submit();
    }
    render(root, ctrl);
    expect(root.querySelector(".screen.part-complete")).not.toBeNull();
    expect(root.textContent).toContain("rated 2 of 3");

    await ctrl.continueNextPart();
    ctrl.player!.tick(10.5);
    ctrl.selectScore(1);
    await ctrl.submit();
    render(root, ctrl);
    expect(root.querySelector(".screen.all-complete")).not.toBeNull();
    expect(root.querySelector("#completion")!.textContent).toContain("3 of 3");
  });

  it("lists every part with progress on the start screen", () => {
    render(root, ctrl);
    expect(root.querySelectorAll(".part")).toHaveLength(2);
    expect(root.textContent).toContain("session 1 part 1 (training)");
  });
});
