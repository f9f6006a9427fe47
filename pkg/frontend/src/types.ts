/** Shapes of the service's JSON payloads, mirrored verbatim. */

export interface Params {
  breadth: number;
  depth: number;
  diversity: number;
}

export interface Citation {
  key: string;
  arxiv_id: string;
  title: string;
  authors: string[];
  year: number | null;
  url: string;
}

export interface JobResult {
  body: string;
  citations: Citation[];
  params_used: Params;
  shortlist_ids: string[];
  warnings: string[];
}

export interface JobView {
  job_id: string;
  state: string;
  params: Params;
  submitted_at: string;
  updated_at: string;
  result: JobResult | null;
  error: string | null;
  progress_note: string;
}

export interface ServiceError {
  error: { code: string; message: string; field?: string };
}

export const DEFAULT_PARAMS: Params = { breadth: 10, depth: 2, diversity: 0 };
