// Shared test plumbing: service discovery, HS256 tokens, publishing helpers.

import { createHmac } from "node:crypto";
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import type { FilterEntry, FilterlistDoc } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

export interface ServiceInfo {
  baseUrl: string;
  jwtSecret: string;
  labelsPath: string;
}

export function serviceInfo(): ServiceInfo {
  const raw = readFileSync(join(here, ".tmp", "service.json"), "utf-8");
  return JSON.parse(raw) as ServiceInfo;
}

function b64url(data: Buffer | string): string {
  return Buffer.from(data).toString("base64url");
}

export function hs256Token(
  secret: string,
  claims: Record<string, unknown>,
): string {
  const head = b64url(JSON.stringify({ alg: "HS256", typ: "JWT" }));
  const body = b64url(JSON.stringify(claims));
  const signature = createHmac("sha256", secret)
    .update(`${head}.${body}`)
    .digest("base64url");
  return `${head}.${body}.${signature}`;
}

export function superUserToken(secret: string, sub = "tester"): string {
  return hs256Token(secret, {
    sub,
    role: "super-user",
    exp: Math.floor(Date.now() / 1000) + 3600,
  });
}

export function makeEntries(
  blocked: string[],
  allowed: string[] = [],
): FilterEntry[] {
  const entries: FilterEntry[] = [
    ...blocked.map((domain) => ({
      domain,
      verdict: "blacklisted" as const,
      probability: 0.97,
      updated_at: 0,
    })),
    ...allowed.map((domain) => ({
      domain,
      verdict: "whitelisted" as const,
      probability: 0.02,
      updated_at: 0,
    })),
  ];
  entries.sort((a, b) => (a.domain < b.domain ? -1 : 1));
  return entries;
}

export async function currentCheckpoint(baseUrl: string): Promise<number> {
  const response = await fetch(`${baseUrl}/v1/health`);
  const doc = (await response.json()) as { checkpoint: number | null };
  return doc.checkpoint ?? 0;
}

/** Publish a new snapshot one checkpoint past the server's current one. */
export async function publishNext(
  info: ServiceInfo,
  entries: FilterEntry[],
): Promise<FilterlistDoc> {
  const checkpoint = (await currentCheckpoint(info.baseUrl)) + 1;
  const doc: FilterlistDoc = { checkpoint, entries };
  const response = await fetch(`${info.baseUrl}/v1/admin/publish`, {
    method: "POST",
    headers: {
      "Content-Type": "application/json",
      Authorization: `Bearer ${superUserToken(info.jwtSecret, "publisher")}`,
    },
    body: JSON.stringify(doc),
  });
  if (!response.ok) {
    throw new Error(`publish failed: ${response.status} ${await response.text()}`);
  }
  return doc;
}
