// Wire types mirroring the service's request/response models.

export interface DocumentInfo {
    id: string;
    version: number;
    label: string;
    num_frames: number;
    num_phonemes: number;
    hop_seconds: number;
}

export interface DocumentView {
    id: string;
    version: number;
    label: string;
    hop_seconds: number;
    phonemes: string[];
    frames: number[][];
    active_rows: number[];
}

export interface RunInfo {
    phoneme: string;
    start: number;
    length: number;
}

export interface DocumentSummary {
    num_frames: number;
    num_phonemes: number;
    hop_seconds: number;
    runs: RunInfo[];
}

export interface CreateResponse {
    id: string;
    version: number;
    summary: DocumentSummary;
}

export interface SubstitutionInfo {
    from_phoneme: string;
    to_phoneme: string;
    frame_start: number;
    frame_end: number;
}

export interface RuleMatchInfo {
    rule_index: number;
    rule: string;
    run_span: [number, number];
    frame_span: [number, number];
    substitutions: SubstitutionInfo[];
}

export interface EditReport {
    matches: RuleMatchInfo[];
}

export interface DistanceResult {
    mean: number;
    curve: number[];
}

export type Operation =
    | { type: "rules"; rules: string }
    | { type: "set_region"; start: number; end: number; target: number[] }
    | { type: "interpolate"; other_id: string; t: number; start?: number; end?: number };

export interface EditRequest {
    base_version: number;
    operation: Operation;
}

export interface EditResponse {
    id: string;
    version: number;
    edit_report: EditReport | null;
    framewise_distance_to_previous: DistanceResult;
}

export interface JsonDocument {
    phonemes: string[];
    hop_seconds: number;
    frames: number[][];
    label?: string;
}
