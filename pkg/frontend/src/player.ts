import { ManifestFrame, RunManifest } from "./types";

export const RATING_GATE_SECONDS = 10;

const VIDEO_CLOCK_RATE = 90000;
const AUDIO_CLOCK_RATE = 16000;

export function frameTime(frame: ManifestFrame): number {
  const rate = frame.kind === "video" ? VIDEO_CLOCK_RATE : AUDIO_CLOCK_RATE;
  return frame.rtp_timestamp / rate;
}

/**
 * Playback model over a received-media manifest: a cursor advances through
 * the frame timeline in media time.  The rating gate counts cumulative
 * *playback* seconds, so pausing never brings the menu closer.
 */
export class Player {
  readonly frames: ManifestFrame[];
  readonly duration: number;
  private playbackElapsed = 0;
  private paused = false;

  constructor(manifest: RunManifest) {
    this.frames = manifest.frames;
    const last = this.frames.length
      ? Math.max(...this.frames.map(frameTime))
      : 0;
    this.duration = last;
  }

  /**
   * Advance playback time; ignored while paused.  Time keeps accruing after
   * the last frame (the player idles on it), so even a clip shorter than the
   * gate eventually unlocks the menu.
   */
  tick(dtSeconds: number): void {
    if (this.paused || dtSeconds <= 0) return;
    this.playbackElapsed += dtSeconds;
  }

  pause(): void {
    this.paused = true;
  }

  resume(): void {
    this.paused = false;
  }

  get isPaused(): boolean {
    return this.paused;
  }

  get elapsed(): number {
    return this.playbackElapsed;
  }

  get finished(): boolean {
    return this.playbackElapsed >= this.duration;
  }

  /** True once 10 s of the sequence have actually been watched. */
  get ratingEnabled(): boolean {
    return this.playbackElapsed >= RATING_GATE_SECONDS;
  }

  /** Frames at or before the playback cursor, for timeline rendering. */
  playedCount(kind: "video" | "audio"): number {
    return this.frames.filter((f) => f.kind === kind && frameTime(f) <= this.playbackElapsed)
      .length;
  }
}
