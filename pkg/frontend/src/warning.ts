// Warning page shown when a navigation hits a blacklisted domain. Rendered
// as plain HTML so the same code serves the extension page, the demo page
// and the Node test harness.

export type WarningChoice = "go-back" | "whitelist";

export interface WarningPage {
  domain: string;
  html: string;
  renderedAt: number;
  choose(choice: WarningChoice): void;
}

export function buildWarningPage(
  domain: string,
  onChoice: (choice: WarningChoice) => void,
): WarningPage {
  const html = `
<div class="nf-warning" role="alertdialog" aria-labelledby="nf-title">
  <h1 id="nf-title">This site was flagged as a fake news source</h1>
  <p><strong>${escapeHtml(domain)}</strong> is on the current blocklist.</p>
  <p>You can go back to safety, or whitelist the site if you trust it.</p>
  <div class="nf-actions">
    <button data-action="go-back">Go back</button>
    <button data-action="whitelist">Whitelist this domain</button>
  </div>
</div>`.trim();
  return {
    domain,
    html,
    renderedAt: performance.now(),
    choose: onChoice,
  };
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
