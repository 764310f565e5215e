import { ApiClient } from "./api";
import { SessionController } from "./session";
import { render } from "./view";

function raterId(): string {
  // session token only; no other client-side persistence
  let id = sessionStorage.getItem("rtplab-rater");
  if (!id) {
    id = window.prompt("Enter your rater id:", "") || `rater-${Date.now()}`;
    sessionStorage.setItem("rtplab-rater", id);
  }
  return id;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("#app container missing");
  const ctrl = new SessionController(new ApiClient(""), raterId());

  const redraw = () => render(root, ctrl);

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
    if (!target) return;
    const action = target.dataset.action;
    const done = (p: Promise<unknown> | void) => Promise.resolve(p).then(redraw);
    switch (action) {
      case "open-part":
        done(ctrl.openPart(Number(target.dataset.session), Number(target.dataset.part)));
        break;
      case "continue":
        done(ctrl.continueNextPart());
        break;
      case "toggle-pause":
        if (ctrl.player) ctrl.player.isPaused ? ctrl.player.resume() : ctrl.player.pause();
        redraw();
        break;
      case "select-score":
        ctrl.selectScore(Number(target.dataset.score));
        redraw();
        break;
      case "submit":
        done(ctrl.submit());
        break;
      case "retry":
        done(ctrl.retryItem());
        break;
    }
  });

  await ctrl.init();
  redraw();

  let last = performance.now();
  let lastDraw = 0;
  const loop = (now: number) => {
    const dt = (now - last) / 1000;
    last = now;
    if (ctrl.player) {
      const wasEnabled = ctrl.ratingEnabled;
      ctrl.player.tick(dt);
      // redraw at ~5 Hz while playing, immediately when the menu unlocks
      if (ctrl.ratingEnabled !== wasEnabled || now - lastDraw > 200) {
        lastDraw = now;
        redraw();
      }
    }
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = `failed to start: ${err}`;
});
