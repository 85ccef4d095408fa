// Client interaction loop: navigation checks, the warn-and-choose flow and
// label reporting. Checks are purely local; the warning never blocks page
// loading (the host decides how to interpose), and whitelisting writes a
// local override that is never uploaded.

import { LocalStore } from "./store.js";
import { buildWarningPage, WarningPage } from "./warning.js";
import type { CheckResult, LabelValue } from "./types.js";

export interface NavigationHost {
  /** Called when the user picks "go back": the navigation is abandoned. */
  cancelNavigation(domain: string): void;
  /** Display hook; receives the rendered warning page. */
  showWarning(page: WarningPage): void;
}

export type NavigationOutcome =
  | { result: "proceeded"; check: CheckResult }
  | { result: "warned"; page: WarningPage };

export type ReportOutcome =
  | { result: "reported"; response: unknown }
  | { result: "local-only" }
  | { result: "rejected"; status: number };

export class Client {
  constructor(
    private readonly store: LocalStore,
    private readonly baseUrl: string,
    private readonly host: NavigationHost,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  /** Simulated navigation event: local check, warning on blacklisted hits. */
  navigate(domain: string): NavigationOutcome {
    const check = this.store.check(domain);
    if (check !== "blocked") {
      // allowed and unknown domains pass through silently
      return { result: "proceeded", check };
    }
    const page = buildWarningPage(domain, (choice) => {
      if (choice === "go-back") {
        this.host.cancelNavigation(domain);
      } else {
        this.store.addOverride(domain, "allowed");
      }
    });
    this.host.showWarning(page);
    return { result: "warned", page };
  }

  /**
   * Label report: super-users (holding a token) push to the service, anyone
   * else only adjusts their local overrides.
   */
  async report(domain: string, label: LabelValue): Promise<ReportOutcome> {
    this.store.addOverride(domain, label === "fake" ? "blocked" : "allowed");
    if (!this.store.jwt) {
      return { result: "local-only" };
    }
    const response = await this.fetchFn(`${this.baseUrl}/v1/labels`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${this.store.jwt}`,
      },
      body: JSON.stringify({ domain, proposed_label: label }),
    });
    if (!response.ok) {
      return { result: "rejected", status: response.status };
    }
    return { result: "reported", response: await response.json() };
  }
}
