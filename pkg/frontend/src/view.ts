import { Player, frameTime } from "./player";
import { SessionController } from "./session";
import { ACR_LABELS, ManifestFrame } from "./types";

const TIMELINE_CELLS = 160; // frames are bucketed so long clips stay light

function el(tag: string, attrs: Record<string, string> = {}, text = ""): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function bucketClass(frames: ManifestFrame[]): string {
  // worst status wins within a bucket
  if (frames.some((f) => f.fragments_received === 0)) return "cell missing";
  if (frames.some((f) => !f.complete || !f.digest_ok)) return "cell partial";
  return "cell ok";
}

function renderTimeline(player: Player, kind: "video" | "audio"): HTMLElement {
  const row = el("div", { class: `timeline ${kind}` });
  const frames = player.frames.filter((f) => f.kind === kind);
  if (!frames.length) return row;
  const perCell = Math.max(1, Math.ceil(frames.length / TIMELINE_CELLS));
  for (let i = 0; i < frames.length; i += perCell) {
    const bucket = frames.slice(i, i + perCell);
    const cell = el("span", { class: bucketClass(bucket) });
    if (frameTime(bucket[bucket.length - 1]) <= player.elapsed) {
      cell.classList.add("played");
    }
    row.appendChild(cell);
  }
  return row;
}

function renderItemScreen(ctrl: SessionController): HTMLElement {
  const box = el("div", { class: "screen item" });
  const playlist = ctrl.playlist!;
  box.appendChild(
    el(
      "div",
      { id: "top-bar" },
      `session ${playlist.session} / part ${playlist.part}` +
        (playlist.training ? " (training)" : "") +
        ` — rated ${ctrl.ratedSoFar} of ${ctrl.totalItems}`,
    ),
  );

  if (ctrl.needsRetry) {
    const retry = el("button", { id: "retry", "data-action": "retry" }, "Retry loading media");
    box.appendChild(retry);
    return box;
  }

  const player = ctrl.player;
  if (!player) {
    box.appendChild(el("div", { class: "loading" }, "loading…"));
    return box;
  }

  const stage = el("div", { class: "stage" });
  stage.appendChild(renderTimeline(player, "video"));
  stage.appendChild(renderTimeline(player, "audio"));
  const pct = player.duration > 0 ? Math.min(100, (100 * player.elapsed) / player.duration) : 100;
  const cursor = el("div", { class: "cursor" });
  cursor.style.width = `${pct.toFixed(2)}%`;
  stage.appendChild(cursor);
  box.appendChild(stage);

  box.appendChild(
    el(
      "div",
      { class: "clock" },
      `${player.elapsed.toFixed(1)} s / ${player.duration.toFixed(1)} s`,
    ),
  );
  box.appendChild(
    el(
      "button",
      { id: "pause", "data-action": "toggle-pause" },
      player.isPaused ? "Resume" : "Pause",
    ),
  );

  // The ACR menu and submit control exist only once 10 s have been watched.
  if (ctrl.ratingEnabled) {
    const menu = el("div", { id: "acr-menu" });
    for (const [score, label] of ACR_LABELS) {
      const choice = el(
        "button",
        { class: "acr-choice", "data-action": "select-score", "data-score": String(score) },
        `${score} — ${label}`,
      );
      if (ctrl.selectedScore === score) choice.classList.add("selected");
      menu.appendChild(choice);
    }
    box.appendChild(menu);
    const submit = el("button", { id: "submit-rating", "data-action": "submit" }, "Submit rating");
    if (ctrl.selectedScore === null) submit.setAttribute("disabled", "disabled");
    box.appendChild(submit);
  } else {
    box.appendChild(
      el("div", { class: "gate-note" }, "rating opens after the first 10 seconds"),
    );
  }
  return box;
}

function renderStartScreen(ctrl: SessionController): HTMLElement {
  const box = el("div", { class: "screen start" });
  box.appendChild(el("h1", {}, "Subjective quality assessment"));
  box.appendChild(el("div", { id: "top-bar" }, `rated ${ctrl.ratedSoFar} of ${ctrl.totalItems}`));
  const list = el("div", { class: "parts" });
  for (const part of ctrl.parts) {
    const label = `session ${part.session} part ${part.part}` + (part.training ? " (training)" : "");
    const button = el(
      "button",
      {
        class: "part",
        "data-action": "open-part",
        "data-session": String(part.session),
        "data-part": String(part.part),
      },
      `${label} — ${part.rated}/${part.total}`,
    );
    if (part.next_position === null) button.classList.add("done");
    list.appendChild(button);
  }
  box.appendChild(list);
  box.appendChild(el("button", { id: "continue", "data-action": "continue" }, "Continue"));
  return box;
}

function renderPartComplete(ctrl: SessionController): HTMLElement {
  const box = el("div", { class: "screen part-complete" });
  box.appendChild(el("h1", {}, "Part complete"));
  box.appendChild(
    el("div", { id: "top-bar" }, `rated ${ctrl.ratedSoFar} of ${ctrl.totalItems}`),
  );
  box.appendChild(
    el(
      "p",
      { class: "instructions" },
      "Take a short break if you need one. When you are ready, continue with " +
        "the next part; sequences keep the same rating scale.",
    ),
  );
  box.appendChild(el("button", { id: "continue", "data-action": "continue" }, "Continue"));
  return box;
}

function renderAllComplete(ctrl: SessionController): HTMLElement {
  const box = el("div", { class: "screen all-complete" });
  box.appendChild(el("h1", {}, "All sessions complete"));
  box.appendChild(
    el("p", { id: "completion" }, `You rated ${ctrl.ratedSoFar} of ${ctrl.totalItems} sequences. Thank you!`),
  );
  return box;
}

export function render(root: HTMLElement, ctrl: SessionController): void {
  root.textContent = "";
  if (ctrl.banner) root.appendChild(el("div", { id: "banner", class: "banner" }, ctrl.banner));
  switch (ctrl.screen) {
    case "start":
      root.appendChild(renderStartScreen(ctrl));
      break;
    case "item":
      root.appendChild(renderItemScreen(ctrl));
      break;
    case "part-complete":
      root.appendChild(renderPartComplete(ctrl));
      break;
    case "all-complete":
      root.appendChild(renderAllComplete(ctrl));
      break;
  }
}
