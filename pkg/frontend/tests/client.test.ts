// Interaction loop and label reporting against the live service.

import { describe, expect, it } from "vitest";

import { Client, NavigationHost } from "../src/client.js";
import { LocalStore } from "../src/store.js";
import { sync } from "../src/sync.js";
import type { WarningPage } from "../src/warning.js";
import { hs256Token, serviceInfo, superUserToken } from "./helpers.js";

class RecordingHost implements NavigationHost {
  cancelled: string[] = [];
  warnings: WarningPage[] = [];

  cancelNavigation(domain: string): void {
    this.cancelled.push(domain);
  }

  showWarning(page: WarningPage): void {
    this.warnings.push(page);
  }
}

async function syncedClient(): Promise<{
  client: Client;
  store: LocalStore;
  host: RecordingHost;
}> {
  const info = serviceInfo();
  const store = new LocalStore();
  await sync(store, info.baseUrl);
  const host = new RecordingHost();
  return { client: new Client(store, info.baseUrl, host), store, host };
}

describe("navigation", () => {
  it("warns on a blacklisted domain and renders its name", async () => {
    const { client, host } = await syncedClient();
    const outcome = client.navigate("blocked-0001.example.com");
    expect(outcome.result).toBe("warned");
    expect(host.warnings).toHaveLength(1);
    expect(host.warnings[0]!.html).toContain("blocked-0001.example.com");
    expect(host.warnings[0]!.html).toContain("Go back");
  });

  it("passes whitelisted and unknown domains through silently", async () => {
    const { client, host } = await syncedClient();
    expect(client.navigate("trusted-0001.example.com").result).toBe("proceeded");
    expect(client.navigate("nobody-heard-of.example.com").result).toBe("proceeded");
    expect(host.warnings).toHaveLength(0);
  });

  it("go-back cancels the navigation", async () => {
    const { client, host } = await syncedClient();
    const outcome = client.navigate("blocked-0002.example.com");
    expect(outcome.result).toBe("warned");
    if (outcome.result === "warned") {
      outcome.page.choose("go-back");
    }
    expect(host.cancelled).toEqual(["blocked-0002.example.com"]);
  });

  it("whitelist-then-revisit shows no warning", async () => {
    const { client, host } = await syncedClient();
    const outcome = client.navigate("blocked-0003.example.com");
    expect(outcome.result).toBe("warned");
    if (outcome.result === "warned") {
      outcome.page.choose("whitelist");
    }
    const revisit = client.navigate("blocked-0003.example.com");
    expect(revisit.result).toBe("proceeded");
    expect(host.warnings).toHaveLength(1); // only the first visit warned
    expect(host.cancelled).toHaveLength(0);
  });
});

describe("report()", () => {
  it("posts with a super-user token and the service accepts", async () => {
    const info = serviceInfo();
    const { client, store } = await syncedClient();
    store.jwt = superUserToken(info.jwtSecret, "reporter-1");
    const outcome = await client.report("report-me.example.com", "fake");
    expect(outcome.result).toBe("reported");
    if (outcome.result === "reported") {
      const body = outcome.response as { count: number; status: string };
      expect(body.count).toBe(1);
      expect(body.status).toBe("accepted");
    }
  });

  it("a duplicate report leaves the server quorum unchanged", async () => {
    const info = serviceInfo();
    const { client, store } = await syncedClient();
    store.jwt = superUserToken(info.jwtSecret, "reporter-dup");
    const first = await client.report("dup-target.example.com", "fake");
    const second = await client.report("dup-target.example.com", "fake");
    expect(first.result).toBe("reported");
    expect(second.result).toBe("reported");
    if (second.result === "reported") {
      const body = second.response as { count: number; status: string };
      expect(body.count).toBe(1);
      expect(body.status).toBe("duplicate");
    }
  });

  it("applies locally only without a token", async () => {
    const { client, store } = await syncedClient();
    const outcome = await client.report("local-flag.example.com", "fake");
    expect(outcome.result).toBe("local-only");
    expect(store.check("local-flag.example.com")).toBe("blocked");
  });

  it("is rejected by the service with a plain-user token", async () => {
    const info = serviceInfo();
    const { client, store } = await syncedClient();
    store.jwt = hs256Token(info.jwtSecret, {
      sub: "plain",
      role: "user",
      exp: Math.floor(Date.now() / 1000) + 600,
    });
    const outcome = await client.report("user-role.example.com", "fake");
    expect(outcome.result).toBe("rejected");
    if (outcome.result === "rejected") {
      expect(outcome.status).toBe(403);
    }
    // the local override still applied
    expect(store.check("user-role.example.com")).toBe("blocked");
  });
});
