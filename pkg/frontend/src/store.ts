// Local client state: an immutable filterlist snapshot plus user overrides.
//
// check() never touches the network; it binary-searches the snapshot that
// was swapped in atomically by the last sync. Overrides always win over
// snapshot verdicts and are never uploaded anywhere.

import type {
  CheckResult,
  DeltaDoc,
  FilterEntry,
  FilterlistDoc,
  OverrideAction,
  OverrideEntry,
} from "./types.js";

export class StaleDeltaError extends Error {}

interface Snapshot {
  checkpoint: number;
  entries: readonly FilterEntry[];
}

export function normalizeDomain(raw: string): string {
  const domain = raw.trim().toLowerCase().replace(/\.$/, "");
  if (!domain || domain.includes("/") || domain.includes(":")) {
    throw new Error(`not a bare domain: ${raw}`);
  }
  return domain;
}

function assertSorted(entries: readonly FilterEntry[]): void {
  for (let i = 1; i < entries.length; i++) {
    if (entries[i]!.domain <= entries[i - 1]!.domain) {
      throw new Error(`filterlist entries not strictly sorted at ${entries[i]!.domain}`);
    }
  }
}

export class LocalStore {
  private snapshot: Snapshot | null = null;
  private overrides = new Map<string, OverrideAction>();
  jwt: string | null = null;

  get checkpoint(): number | null {
    return this.snapshot?.checkpoint ?? null;
  }

  get entryCount(): number {
    return this.snapshot?.entries.length ?? 0;
  }

  loadSnapshot(doc: FilterlistDoc): void {
    assertSorted(doc.entries);
    // single reference assignment: a concurrent check() sees old or new, never a mix
    this.snapshot = Object.freeze({
      checkpoint: doc.checkpoint,
      entries: Object.freeze([...doc.entries]),
    });
  }

  applyDelta(delta: DeltaDoc): void {
    if (this.snapshot === null || delta.from !== this.snapshot.checkpoint) {
      throw new StaleDeltaError(
        `delta from ${delta.from} does not match checkpoint ${this.checkpoint}`,
      );
    }
    if (delta.from === delta.to && delta.upserts.length === 0 && delta.removals.length === 0) {
      return; // already up to date
    }
    const merged = new Map(this.snapshot.entries.map((e) => [e.domain, e]));
    for (const domain of delta.removals) {
      merged.delete(domain); // removing a non-member is a no-op
    }
    for (const entry of delta.upserts) {
      merged.set(entry.domain, entry);
    }
    const entries = [...merged.values()].sort((a, b) =>
      a.domain < b.domain ? -1 : a.domain > b.domain ? 1 : 0,
    );
    this.loadSnapshot({ checkpoint: delta.to, entries });
  }

  /** Binary search over the snapshot; overrides take precedence. */
  check(rawDomain: string): CheckResult {
    const domain = normalizeDomain(rawDomain);
    const override = this.overrides.get(domain);
    if (override !== undefined) {
      return override;
    }
    const snapshot = this.snapshot;
    if (snapshot === null) {
      return "unknown";
    }
    const verdict = binarySearchVerdict(snapshot.entries, domain);
    if (verdict === "blacklisted") return "blocked";
    if (verdict === "whitelisted") return "allowed";
    return "unknown";
  }

  addOverride(rawDomain: string, action: OverrideAction): void {
    this.overrides.set(normalizeDomain(rawDomain), action);
  }

  get overrideList(): OverrideEntry[] {
    return [...this.overrides.entries()]
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([domain, action]) => ({ domain, action }));
  }

  /** Canonical filterlist JSON plus the overrides array (and token, if any). */
  serialize(): string {
    return JSON.stringify({
      filterlist: this.snapshot
        ? { checkpoint: this.snapshot.checkpoint, entries: this.snapshot.entries }
        : null,
      overrides: this.overrideList,
      jwt: this.jwt,
    });
  }

  serializedByteLength(): number {
    return new TextEncoder().encode(this.serialize()).length;
  }

  static deserialize(text: string): LocalStore {
    const doc = JSON.parse(text) as {
      filterlist: FilterlistDoc | null;
      overrides: OverrideEntry[];
      jwt: string | null;
    };
    const store = new LocalStore();
    if (doc.filterlist) {
      store.loadSnapshot(doc.filterlist);
    }
    for (const { domain, action } of doc.overrides ?? []) {
      store.addOverride(domain, action);
    }
    store.jwt = doc.jwt ?? null;
    return store;
  }
}

function binarySearchVerdict(
  entries: readonly FilterEntry[],
  domain: string,
): FilterEntry["verdict"] | null {
  let lo = 0;
  let hi = entries.length;
  while (lo < hi) {
    const mid = (lo + hi) >>> 1;
    if (entries[mid]!.domain < domain) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < entries.length && entries[lo]!.domain === domain) {
    return entries[lo]!.verdict;
  }
  return null;
}
