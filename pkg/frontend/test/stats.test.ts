import { describe, expect, it } from "vitest";

import { erf, fmt, linearFit, linearTicks, logTicks, median, normalCdf } from "../src/stats.js";

describe("median", () => {
  it("odd and even lengths", () => {
    expect(median([3, 1, 2])).toBe(2);
    expect(median([4, 1, 2, 3])).toBe(2.5);
  });

  it("rejects empty input", () => {
    expect(() => median([])).toThrow();
  });
});

describe("linearFit", () => {
  it("recovers an exact line", () => {
    const { slope, intercept } = linearFit([1, 2, 3, 4], [3, 5, 7, 9]);
    expect(slope).toBeCloseTo(2, 12);
    expect(intercept).toBeCloseTo(1, 12);
  });

  it("needs two points", () => {
    expect(() => linearFit([1], [2])).toThrow();
  });
});

describe("normal helpers", () => {
  it("erf matches reference values", () => {
    expect(erf(1)).toBeCloseTo(0.8427007929, 6);
    expect(erf(-1)).toBeCloseTo(-0.8427007929, 6);
    expect(erf(0)).toBeCloseTo(0, 7);
  });

  it("normalCdf matches reference values", () => {
    expect(normalCdf(0)).toBeCloseTo(0.5, 7);
    expect(normalCdf(1.96)).toBeCloseTo(0.9750021, 5);
    expect(normalCdf(-1.96)).toBeCloseTo(0.0249979, 5);
  });
});

describe("formatting and ticks", () => {
  it("fmt is stable and short", () => {
    expect(fmt(50)).toBe("50");
    expect(fmt(0.02127659574468085)).toBe("0.0212766");
    expect(fmt(1 / 3)).toBe("0.333333");
  });

  it("linear ticks cover the range", () => {
    const ticks = linearTicks(0, 103);
    expect(ticks[0]).toBeGreaterThanOrEqual(0);
    expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(103);
    expect(ticks.length).toBeGreaterThanOrEqual(3);
  });

  it("log ticks use 1-2-5 mantissas", () => {
    expect(logTicks(0.01, 1)).toEqual([0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1]);
  });
});
