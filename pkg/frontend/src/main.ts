/** DOM wiring: form submission, job polling, and result display.
 *
 * Two input tabs (abstract | upload). If both a file and abstract text are
 * set, the file wins — stated in the upload tab's copy.
 */

import {
  ApiError,
  buildGenerateRequest,
  buildPdfForm,
  fetchJob,
  pollInterval,
  submitGenerate,
  submitPdf,
} from "./api.js";
import { renderExpired, renderJob } from "./render.js";
import type { JobView, Params } from "./types.js";
import { validateAbstract, validateParams } from "./validate.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readParams(): Params {
  return {
    breadth: Number(el<HTMLInputElement>("breadth").value),
    depth: Number(el<HTMLInputElement>("depth").value),
    diversity: Number(el<HTMLInputElement>("diversity").value),
  };
}

function showFieldErrors(errors: { field: string; message: string }[]): void {
  for (const span of document.querySelectorAll<HTMLElement>(".field-error")) {
    span.textContent = "";
  }
  for (const e of errors) {
    const span = document.getElementById(`${e.field}-error`);
    if (span) span.textContent = e.message;
  }
}

let activePoll = 0;

async function watchJob(jobId: string): Promise<void> {
  const view = el<HTMLElement>("job-view");
  const token = ++activePoll; // at most one in-flight poll per session
  const started = Date.now();
  for (;;) {
    if (token !== activePoll) return;
    let job: JobView;
    try {
      job = await fetchJob(jobId);
    } catch (err) {
      view.innerHTML =
        err instanceof Error && err.message === "job expired"
          ? renderExpired()
          : renderJob({ state: "failed", error: String(err) } as JobView);
      return;
    }
    view.innerHTML = renderJob(job);
    if (job.state === "done" || job.state === "failed") {
      wireCopyButtons(job);
      return;
    }
    await new Promise((r) => setTimeout(r, pollInterval(Date.now() - started)));
  }
}

function wireCopyButtons(job: JobView): void {
  const bar = el<HTMLElement>("copy-bar");
  if (job.state !== "done" || !job.result) {
    bar.hidden = true;
    return;
  }
  bar.hidden = false;
  const result = job.result;
  el<HTMLButtonElement>("copy-body").onclick = () =>
    navigator.clipboard.writeText(result.body);
  el<HTMLButtonElement>("copy-citations").onclick = () =>
    navigator.clipboard.writeText(
      result.citations.map((c) => `${c.key} ${c.title || c.arxiv_id} ${c.url}`).join("\n"),
    );
}

async function onSubmit(event: Event): Promise<void> {
  event.preventDefault();
  const params = readParams();
  const file = el<HTMLInputElement>("pdf-file").files?.[0] ?? null;
  const abstract = el<HTMLTextAreaElement>("abstract").value;

  const errors = [...validateParams(params), ...(file ? [] : validateAbstract(abstract))];
  showFieldErrors(errors);
  if (errors.length > 0) return;

  const view = el<HTMLElement>("job-view");
  try {
    const { job_id } = file
      ? await submitPdf(buildPdfForm(file, params))
      : await submitGenerate(buildGenerateRequest(abstract, params));
    view.innerHTML = `<p class="progress">submitted job ${job_id}</p>`;
    void watchJob(job_id);
  } catch (err) {
    if (err instanceof ApiError && err.field) {
      showFieldErrors([{ field: err.field, message: err.message }]);
    } else {
      view.innerHTML = renderJob({ state: "failed", error: String(err) } as JobView);
    }
  }
}

function wireSliders(): void {
  for (const name of ["breadth", "depth", "diversity"]) {
    const input = el<HTMLInputElement>(name);
    const label = el<HTMLElement>(`${name}-value`);
    const update = () => (label.textContent = input.value);
    input.addEventListener("input", update);
    update();
  }
}

function wireTabs(): void {
  const tabAbstract = el<HTMLButtonElement>("tab-abstract");
  const tabUpload = el<HTMLButtonElement>("tab-upload");
  const paneAbstract = el<HTMLElement>("pane-abstract");
  const paneUpload = el<HTMLElement>("pane-upload");
  tabAbstract.onclick = () => {
    paneAbstract.hidden = false;
    paneUpload.hidden = true;
  };
  tabUpload.onclick = () => {
    paneAbstract.hidden = true;
    paneUpload.hidden = false;
  };
}

document.addEventListener("DOMContentLoaded", () => {
  wireSliders();
  wireTabs();
  el<HTMLFormElement>("generate-form").addEventListener("submit", (e) => void onSubmit(e));
});
