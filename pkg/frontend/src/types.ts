export interface PlaylistItem {
  run_id: string;
  position: number;
  training: boolean;
  manifest_url: string;
}

export interface Playlist {
  session: number;
  part: number;
  training: boolean;
  items: PlaylistItem[];
}

export interface ManifestFrame {
  kind: "video" | "audio";
  index: number;
  rtp_timestamp: number;
  size: number;
  fragments_expected: number;
  fragments_received: number;
  complete: boolean;
  digest_ok: boolean;
}

export interface RunManifest {
  run_id: string;
  frames: ManifestFrame[];
}

export interface PartProgress {
  session: number;
  part: number;
  training: boolean;
  rated: number;
  total: number;
  next_position: number | null;
}

export interface Progress {
  rater_id: string;
  parts: PartProgress[];
  total_rated: number;
  total: number;
}

export interface RatingSubmission {
  rater_id: string;
  run_id: string;
  session: number;
  part: number;
  position: number;
  score: number;
}

/** 5-point ACR scale, submitted as 1..5. */
export const ACR_LABELS: ReadonlyArray<readonly [number, string]> = [
  [5, "Excellent"],
  [4, "Good"],
  [3, "Fair"],
  [2, "Poor"],
  [1, "Bad"],
];
