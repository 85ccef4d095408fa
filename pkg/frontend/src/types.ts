// Wire formats shared with the filterlist service (canonical JSON documents).

export type Verdict = "blacklisted" | "whitelisted";

export interface FilterEntry {
  domain: string;
  verdict: Verdict;
  probability: number;
  updated_at: number;
}

export interface FilterlistDoc {
  checkpoint: number;
  entries: FilterEntry[];
}

export interface DeltaDoc {
  from: number;
  to: number;
  upserts: FilterEntry[];
  removals: string[];
}

export type CheckResult = "blocked" | "allowed" | "unknown";

export type OverrideAction = "allowed" | "blocked";

export interface OverrideEntry {
  domain: string;
  action: OverrideAction;
}

export type LabelValue = "fake" | "real";
