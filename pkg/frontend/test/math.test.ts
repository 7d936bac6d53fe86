import { describe, expect, it } from "vitest";

import { logLogSlope, referenceSlope, zeta } from "../src/math.js";

describe("referenceSlope", () => {
  it("gives 1.4 for p = 1/3.3", () => {
    expect(referenceSlope(1 / 3.3)).toBeCloseTo(1.4, 12);
  });

  it("gives 0.85 for p = 1/2.2", () => {
    expect(referenceSlope(1 / 2.2)).toBeCloseTo(2.2 / 2 - 0.25, 12);
  });
});

describe("zeta", () => {
  it("matches pi^2/6 at 2", () => {
    expect(zeta(2)).toBeCloseTo(Math.PI ** 2 / 6, 12);
  });

  it("reconstructs the hard-case field bound", () => {
    const c = 0.4 / Math.sqrt(6);
    expect(1 - c * zeta(1.2)).toBeCloseTo(0.087, 2);
  });

  it("rejects exponents at the pole", () => {
    expect(() => zeta(1.0)).toThrow();
  });
});

describe("logLogSlope", () => {
  it("recovers an exact power law", () => {
    const ns = [16, 32, 64, 128];
    const errs = ns.map((n) => 3.7 * n ** -1.4);
    expect(logLogSlope(ns, errs)).toBeCloseTo(-1.4, 10);
  });

  it("is zero for constant data", () => {
    expect(logLogSlope([8, 16, 32], [0.5, 0.5, 0.5])).toBeCloseTo(0, 12);
  });
});
