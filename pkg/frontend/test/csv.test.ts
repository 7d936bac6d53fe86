import { describe, expect, it } from "vitest";

import { parseConvergenceCsv, SchemaError } from "../src/csv.js";

const HEADER = "theta,c,p,s,alpha,lambda,weights,n,error,seconds,status";

function row(n: number, error: string, status = "ok", weights = "serendipitous") {
  return `2.4,0.6123,0.4545,10,2,0.2941,${weights},${n},${error},0.100,${status}`;
}

describe("parseConvergenceCsv", () => {
  it("parses numeric columns and types", () => {
    const rows = parseConvergenceCsv([HEADER, row(16, "1.5e-04")].join("\n"));
    expect(rows).toHaveLength(1);
    expect(rows[0].n).toBe(16);
    expect(rows[0].error).toBeCloseTo(1.5e-4, 12);
    expect(rows[0].weights).toBe("serendipitous");
    expect(rows[0].s).toBe(10);
  });

  it("maps NaN error rows to null", () => {
    const rows = parseConvergenceCsv(
      [HEADER, row(16, "NaN", "eigenvalue ratio too small")].join("\n"),
    );
    expect(rows[0].error).toBeNull();
    expect(rows[0].status).toContain("eigenvalue");
  });

  it("keeps quoted statuses containing commas intact", () => {
    const quoted = `2.4,0.6,0.45,10,2,0.29,spod,16,NaN,0.1,"failed: a, b"`;
    const rows = parseConvergenceCsv([HEADER, quoted].join("\n"));
    expect(rows[0].status).toBe("failed: a, b");
  });

  it("rejects a missing column", () => {
    const bad = "theta,c,p,s,alpha,lambda,weights,n,error,seconds\n" +
      "2.4,0.6,0.45,10,2,0.29,spod,16,0.5,0.1";
    expect(() => parseConvergenceCsv(bad)).toThrow(SchemaError);
    expect(() => parseConvergenceCsv(bad)).toThrow(/status/);
  });

  it("rejects non-numeric fields with a line number", () => {
    const bad = [HEADER, row(16, "oops")].join("\n");
    expect(() => parseConvergenceCsv(bad)).toThrow(/line 2/);
  });
});
