import { describe, expect, it } from "vitest";

import { Player, frameTime } from "../src/player";
import { makeManifest } from "./fake_server";

function makePlayer(videoFrames = 375): Player {
  return new Player({ run_id: "x", frames: makeManifest("x", videoFrames) });
}

describe("playback gate", () => {
  it("keeps the rating locked below 10 s and opens it at exactly 10 s", () => {
    const player = makePlayer();
    player.tick(9.9);
    expect(player.ratingEnabled).toBe(false);
    player.tick(0.1);
    expect(player.elapsed).toBeCloseTo(10.0, 9);
    expect(player.ratingEnabled).toBe(true);
  });

  it("excludes paused wall time from the gate", () => {
    const player = makePlayer();
    player.tick(5.0);
    player.pause();
    player.tick(30.0); // half a minute of wall time while paused
    expect(player.elapsed).toBeCloseTo(5.0, 9);
    expect(player.ratingEnabled).toBe(false);
    player.resume();
    player.tick(5.0); // cumulative playback reaches 10 s at wall 40 s
    expect(player.ratingEnabled).toBe(true);
  });

  it("unlocks even for clips shorter than the gate", () => {
    const short = makePlayer(50); // ~2 s of media
    short.tick(2.5);
    expect(short.finished).toBe(true);
    expect(short.ratingEnabled).toBe(false);
    short.tick(7.5);
    expect(short.ratingEnabled).toBe(true);
  });
});

describe("playback model", () => {
  it("derives the duration from the last frame timestamp", () => {
    // 375 video frames span 14.96 s; the 750th audio frame lands last
    const player = makePlayer(375);
    expect(player.duration).toBeCloseTo(749 * 320 / 16000, 6);
  });

  it("maps frame timestamps to media seconds per stream clock", () => {
    const frames = makeManifest("x", 25);
    const video = frames.find((f) => f.kind === "video" && f.index === 10)!;
    const audio = frames.find((f) => f.kind === "audio" && f.index === 10)!;
    expect(frameTime(video)).toBeCloseTo(10 / 25, 9);
    expect(frameTime(audio)).toBeCloseTo(0.2, 9);
  });

  it("counts played frames under the cursor", () => {
    const player = makePlayer(100);
    expect(player.playedCount("video")).toBe(1); // frame 0 at t=0
    player.tick(1.0);
    expect(player.playedCount("video")).toBe(26);
    expect(player.playedCount("audio")).toBe(51);
  });
});
