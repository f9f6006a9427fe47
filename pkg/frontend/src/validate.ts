/** Client-side validation mirroring the service bounds. */

import type { Params } from "./types.js";

export const BOUNDS = {
  breadth: { min: 1, max: 50, step: 1 },
  depth: { min: 1, max: 20, step: 1 },
  diversity: { min: 0, max: 1, step: 0.05 },
} as const;

export interface FieldError {
  field: string;
  message: string;
}

export function validateParams(params: Params): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(params.breadth) || params.breadth < 1 || params.breadth > 50) {
    errors.push({ field: "breadth", message: "breadth must be an integer in [1, 50]" });
  }
  if (!Number.isInteger(params.depth) || params.depth < 1 || params.depth > 20) {
    errors.push({ field: "depth", message: "depth must be an integer in [1, 20]" });
  }
  if (!(params.diversity >= 0 && params.diversity <= 1)) {
    errors.push({ field: "diversity", message: "diversity must be in [0, 1]" });
  }
  return errors;
}

export const ABSTRACT_LENGTH = { min: 200, max: 20_000 } as const;

export function validateAbstract(abstract: string): FieldError[] {
  const trimmed = abstract.trim();
  if (trimmed.length === 0) {
    return [{ field: "abstract", message: "abstract must not be empty" }];
  }
  if (trimmed.length < ABSTRACT_LENGTH.min || trimmed.length > ABSTRACT_LENGTH.max) {
    return [
      {
        field: "abstract",
        message: `abstract must be between ${ABSTRACT_LENGTH.min} and ${ABSTRACT_LENGTH.max} characters`,
      },
    ];
  }
  return [];
}
