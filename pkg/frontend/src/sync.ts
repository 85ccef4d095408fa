// Filterlist synchronization: delta-first, full fetch on bootstrap or when
// the server no longer retains our checkpoint. Network failures are
// non-fatal; the current snapshot stays in place and the caller can retry.

import { LocalStore, StaleDeltaError } from "./store.js";
import type { DeltaDoc, FilterlistDoc } from "./types.js";

export interface SyncResult {
  status: "bootstrapped" | "updated" | "unchanged" | "offline" | "empty";
  checkpoint: number | null;
}

type FetchLike = typeof fetch;

async function fullFetch(
  store: LocalStore,
  baseUrl: string,
  fetchFn: FetchLike,
): Promise<SyncResult> {
  const response = await fetchFn(`${baseUrl}/v1/filterlist`);
  if (response.status === 503) {
    return { status: "empty", checkpoint: store.checkpoint };
  }
  if (!response.ok) {
    throw new Error(`full fetch failed: ${response.status}`);
  }
  const doc = (await response.json()) as FilterlistDoc;
  const changed = doc.checkpoint !== store.checkpoint;
  store.loadSnapshot(doc);
  return {
    status: changed ? "bootstrapped" : "unchanged",
    checkpoint: store.checkpoint,
  };
}

export async function sync(
  store: LocalStore,
  baseUrl: string,
  fetchFn: FetchLike = fetch,
): Promise<SyncResult> {
  try {
    if (store.checkpoint === null) {
      return await fullFetch(store, baseUrl, fetchFn);
    }
    const response = await fetchFn(
      `${baseUrl}/v1/filterlist/delta?since=${store.checkpoint}`,
    );
    if (response.status === 410) {
      return await fullFetch(store, baseUrl, fetchFn);
    }
    if (!response.ok) {
      throw new Error(`delta fetch failed: ${response.status}`);
    }
    const delta = (await response.json()) as DeltaDoc;
    const before = store.checkpoint;
    try {
      store.applyDelta(delta);
    } catch (error) {
      if (error instanceof StaleDeltaError) {
        return await fullFetch(store, baseUrl, fetchFn);
      }
      throw error;
    }
    return {
      status: store.checkpoint === before ? "unchanged" : "updated",
      checkpoint: store.checkpoint,
    };
  } catch {
    // offline or server unreachable: keep the current snapshot
    return { status: "offline", checkpoint: store.checkpoint };
  }
}
