import { ApiClient, ApiError } from "./api";
import { Player } from "./player";
import { PartProgress, Playlist, PlaylistItem, Progress } from "./types";

export type Screen =
  | "start" // part picker with progress
  | "item" // playing one sequence
  | "part-complete" // end-of-part instructions
  | "all-complete";

/**
 * Drives one rater through the assessment: two sessions of four parts, each
 * a server-ordered playlist.  All persistent state lives on the server; a
 * page refresh resumes at the first unrated item via the progress endpoint.
 */
export class SessionController {
  screen: Screen = "start";
  progress: Progress | null = null;
  playlist: Playlist | null = null;
  position = 0;
  player: Player | null = null;
  selectedScore: number | null = null;
  /** Error banner for failed fetches/submits; null when all is well. */
  banner: string | null = null;
  /** Set when the current item's manifest failed to load. */
  needsRetry = false;
  private ratedInPart = new Set<number>();

  constructor(
    private readonly api: ApiClient,
    readonly raterId: string,
  ) {}

  async init(): Promise<void> {
    this.progress = await this.api.getProgress(this.raterId);
    this.screen = "start";
  }

  /** Parts in presentation order: session-major, as served by the backend. */
  get parts(): PartProgress[] {
    return this.progress ? this.progress.parts : [];
  }

  get currentItem(): PlaylistItem | null {
    if (!this.playlist) return null;
    return this.playlist.items[this.position] ?? null;
  }

  get ratingEnabled(): boolean {
    return this.player !== null && this.player.ratingEnabled && !this.needsRetry;
  }

  /** "rated n of N" for the top bar, across the whole assessment. */
  get ratedSoFar(): number {
    return (this.progress ? this.progress.total_rated : 0) + this.ratedInPart.size;
  }

  get totalItems(): number {
    return this.progress ? this.progress.total : 0;
  }

  selectScore(score: number): void {
    if (!this.ratingEnabled) return; // menu is not even visible yet
    if (score < 1 || score > 5) return;
    this.selectedScore = score;
  }

  async openPart(session: number, part: number): Promise<void> {
    this.banner = null;
    try {
      this.playlist = await this.api.getPlaylist(session, part, this.raterId);
    } catch (err) {
      this.banner = `could not load playlist: ${(err as Error).message}`;
      return;
    }
    this.ratedInPart.clear();
    const partProgress = this.parts.find((p) => p.session === session && p.part === part);
    const next = partProgress ? partProgress.next_position : 0;
    if (next === null) {
      this.screen = "part-complete";
      return;
    }
    this.position = next;
    await this.loadItem();
  }

  private async loadItem(): Promise<void> {
    const item = this.currentItem;
    if (!item) {
      this.screen = "part-complete";
      return;
    }
    this.selectedScore = null;
    this.player = null;
    this.screen = "item";
    try {
      const manifest = await this.api.getManifest(item.manifest_url);
      this.player = new Player(manifest);
      this.player.resume();
      this.needsRetry = false;
      this.banner = null;
    } catch (err) {
      // stay on this position; the rater can retry
      this.needsRetry = true;
      this.banner = `could not load media: ${(err as Error).message}`;
    }
  }

  async retryItem(): Promise<void> {
    if (this.needsRetry) await this.loadItem();
  }

  /**
   * Submit the selected score for the current item.  On success the session
   * advances; on a server rejection the position is unchanged and the error
   * is surfaced in the banner.
   */
  async submit(): Promise<void> {
    const item = this.currentItem;
    if (!item || !this.playlist) return;
    if (!this.ratingEnabled || this.selectedScore === null) {
      this.banner = "watch at least 10 seconds, then pick a score";
      return;
    }
    try {
      await this.api.postRating({
        rater_id: this.raterId,
        run_id: item.run_id,
        session: this.playlist.session,
        part: this.playlist.part,
        position: this.position,
        score: this.selectedScore,
      });
    } catch (err) {
      const apiErr = err as ApiError;
      this.banner =
        apiErr.status === 409
          ? "this sequence was already rated"
          : `rating rejected: ${apiErr.message}`;
      return; // no advance on conflict or validation failure
    }
    this.banner = null;
    this.ratedInPart.add(this.position);
    if (this.position + 1 < this.playlist.items.length) {
      this.position += 1;
      await this.loadItem();
    } else {
      await this.finishPart();
    }
  }

  private async finishPart(): Promise<void> {
    this.player = null;
    this.progress = await this.api.getProgress(this.raterId);
    this.ratedInPart.clear();
    const remaining = this.parts.some((p) => p.next_position !== null);
    this.screen = remaining ? "part-complete" : "all-complete";
  }

  /** From the instructions screen: continue with the next unfinished part. */
  async continueNextPart(): Promise<void> {
    const next = this.parts.find((p) => p.next_position !== null);
    if (!next) {
      this.screen = "all-complete";
      return;
    }
    await this.openPart(next.session, next.part);
  }

  backToStart(): void {
    this.playlist = null;
    this.player = null;
    this.screen = "start";
  }
}
