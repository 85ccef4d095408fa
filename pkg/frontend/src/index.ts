export { LocalStore, StaleDeltaError, normalizeDomain } from "./store.js";
export { sync } from "./sync.js";
export type { SyncResult } from "./sync.js";
export { Client } from "./client.js";
export type { NavigationHost, NavigationOutcome, ReportOutcome } from "./client.js";
export { buildWarningPage } from "./warning.js";
export type { WarningPage, WarningChoice } from "./warning.js";
export type * from "./types.js";
