/** Pure HTML-string rendering of job views.
 *
 * Everything shown originates from the job payload — no citation metadata
 * is fabricated client-side. Each "[n]" key in the body becomes a link to
 * the corresponding citation's URL.
 */

import type { Citation, JobResult, JobView } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function escapeRegExp(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

/** Replace every citation key in the body with a hyperlink to its URL. */
export function linkCitations(body: string, citations: Citation[]): string {
  let html = escapeHtml(body);
  for (const citation of citations) {
    const key = escapeHtml(citation.key);
    html = html.replace(
      new RegExp(escapeRegExp(key), "g"),
      `<a class="cite" href="${escapeHtml(citation.url)}" target="_blank" rel="noopener">${key}</a>`,
    );
  }
  return html;
}

export function renderCitationList(citations: Citation[]): string {
  const items = citations.map((c) => {
    const authors = c.authors.length > 0 ? escapeHtml(c.authors.join(", ")) : "";
    const year = c.year !== null ? ` (${c.year})` : "";
    const label = c.title ? escapeHtml(c.title) : escapeHtml(c.arxiv_id);
    return (
      `<li>${escapeHtml(c.key)} ` +
      `<a href="${escapeHtml(c.url)}" target="_blank" rel="noopener">${label}</a>` +
      `${authors ? " — " + authors : ""}${year}</li>`
    );
  });
  return `<ol class="citations">${items.join("")}</ol>`;
}

export function renderWarnings(warnings: string[]): string {
  if (warnings.length === 0) {
    return "";
  }
  const items = warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return (
    `<details class="warnings"><summary>${warnings.length} warning(s)</summary>` +
    `<ul>${items}</ul></details>`
  );
}

export function renderParams(result: JobResult): string {
  const p = result.params_used;
  return (
    `<p class="params">breadth ${p.breadth} · depth ${p.depth} · ` +
    `diversity ${p.diversity}</p>`
  );
}

export function renderResult(result: JobResult): string {
  return (
    `<article class="result">` +
    renderParams(result) +
    `<div class="body">${linkCitations(result.body, result.citations)}</div>` +
    renderCitationList(result.citations) +
    renderWarnings(result.warnings) +
    `</article>`
  );
}

export function renderProgress(job: JobView): string {
  const note = job.progress_note ? ` — ${escapeHtml(job.progress_note)}` : "";
  return `<p class="progress">state: <strong>${escapeHtml(job.state)}</strong>${note}</p>`;
}

/** Render a failed job: the service error message, verbatim (escaped). */
export function renderError(message: string): string {
  return `<div class="error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderExpired(): string {
  return `<div class="error" role="alert">job expired</div>`;
}

export function renderJob(job: JobView): string {
  if (job.state === "failed") {
    return renderError(job.error ?? "job failed");
  }
  if (job.state === "done" && job.result !== null) {
    return renderResult(job.result);
  }
  return renderProgress(job);
}
