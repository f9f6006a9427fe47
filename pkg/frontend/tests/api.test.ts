import { describe, expect, it } from "vitest";

import {
  buildGenerateRequest,
  buildQuestionRequest,
  isServiceError,
  pollInterval,
} from "../src/api.js";

describe("buildGenerateRequest", () => {
  it("defaults to breadth 10, depth 2, diversity 0", () => {
    const body = buildGenerateRequest("an abstract");
    expect(body).toEqual({ abstract: "an abstract", breadth: 10, depth: 2, diversity: 0 });
  });

  it("overrides only the supplied parameters", () => {
    const body = buildGenerateRequest("a", { diversity: 0.3 });
    expect(body.breadth).toBe(10);
    expect(body.depth).toBe(2);
    expect(body.diversity).toBe(0.3);
  });
});

describe("buildQuestionRequest", () => {
  it("carries the question alongside the generation defaults", () => {
    const body = buildQuestionRequest("what exists?", "an abstract");
    expect(body.question).toBe("what exists?");
    expect(body.breadth).toBe(10);
  });
});

describe("isServiceError", () => {
  it("recognizes the service error envelope", () => {
    expect(isServiceError({ error: { code: "validation", message: "bad" } })).toBe(true);
    expect(isServiceError({ job_id: "x" })).toBe(false);
    expect(isServiceError(null)).toBe(false);
  });
});

describe("pollInterval", () => {
  it("polls every 2 s, backing off to 5 s after a minute", () => {
    expect(pollInterval(0)).toBe(2000);
    expect(pollInterval(59_999)).toBe(2000);
    expect(pollInterval(60_000)).toBe(5000);
  });
});
