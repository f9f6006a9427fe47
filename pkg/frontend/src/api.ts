/** Request builders and thin fetch wrappers for the generation service.
 *
 * All payloads here are pure data so the builders can be unit-tested
 * without a browser or a live service.
 */

import { DEFAULT_PARAMS, type JobView, type Params, type ServiceError } from "./types.js";

export interface GenerateRequest extends Params {
  abstract: string;
}

/** Body for POST /api/generate; unset sliders fall back to the defaults. */
export function buildGenerateRequest(
  abstract: string,
  params: Partial<Params> = {},
): GenerateRequest {
  return { abstract, ...DEFAULT_PARAMS, ...params };
}

/** Body for POST /api/question. */
export function buildQuestionRequest(
  question: string,
  abstract: string,
  params: Partial<Params> = {},
): GenerateRequest & { question: string } {
  return { question, ...buildGenerateRequest(abstract, params) };
}

/** Multipart form for POST /api/generate-pdf. File wins over any abstract. */
export function buildPdfForm(file: File, params: Partial<Params> = {}): FormData {
  const merged = { ...DEFAULT_PARAMS, ...params };
  const form = new FormData();
  form.append("file", file);
  form.append("breadth", String(merged.breadth));
  form.append("depth", String(merged.depth));
  form.append("diversity", String(merged.diversity));
  return form;
}

export function isServiceError(payload: unknown): payload is ServiceError {
  return (
    typeof payload === "object" &&
    payload !== null &&
    "error" in payload &&
    typeof (payload as ServiceError).error?.message === "string"
  );
}

/** Error carrying the service's optional offending-field name. */
export class ApiError extends Error {
  constructor(
    message: string,
    public readonly field?: string,
  ) {
    super(message);
  }
}

async function parseResponse<T>(response: Response): Promise<T> {
  const payload = await response.json();
  if (isServiceError(payload)) {
    throw new ApiError(payload.error.message, payload.error.field);
  }
  return payload as T;
}

export async function submitGenerate(body: GenerateRequest): Promise<{ job_id: string }> {
  const response = await fetch("/api/generate", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return parseResponse(response);
}

export async function submitPdf(form: FormData): Promise<{ job_id: string }> {
  const response = await fetch("/api/generate-pdf", { method: "POST", body: form });
  return parseResponse(response);
}

export async function fetchJob(jobId: string): Promise<JobView> {
  const response = await fetch(`/api/jobs/${encodeURIComponent(jobId)}`);
  if (response.status === 404) {
    throw new Error("job expired");
  }
  return parseResponse(response);
}

/** Poll interval in ms: 2 s, backing off to 5 s after the first minute. */
export function pollInterval(elapsedMs: number): number {
  return elapsedMs < 60_000 ? 2_000 : 5_000;
}
