import fs from "node:fs";
import os from "node:os";
import path from "node:path";

import { describe, expect, it } from "vitest";

import { parseConvergenceCsv } from "../src/csv.js";
import { buildPanels } from "../src/plot.js";
import { renderFigure } from "../src/svg.js";
import { parseArgs, run } from "../src/main.js";

const FIXTURES = path.join(__dirname, "fixtures");

function readFixture(name: string): string {
  return fs.readFileSync(path.join(FIXTURES, name), "utf-8");
}

describe("easy-regime figure (harness output, p = 1/3.3)", () => {
  const rows = parseConvergenceCsv(readFixture("easy_convergence.csv"));
  const figure = buildPanels(rows);

  it("produces a single panel with the exact reference slope", () => {
    expect(figure.panels).toHaveLength(1);
    const panel = figure.panels[0];
    // slope of the dashed line, derived from the CSV's own p column
    expect(-panel.referenceSlope).toBe(-1.4);
  });

  it("embeds the slope in the SVG data layer", () => {
    const svg = renderFigure(figure);
    expect(svg).toContain('class="reference" data-slope="-1.4"');
  });

  it("anchors the reference at the first serendipitous point", () => {
    const panel = figure.panels[0];
    const first = panel.curves.find((c) => c.weights === "serendipitous")!
      .points[0];
    expect(panel.referenceAnchor).toEqual(first);
  });

  it("derives the legend field bounds from the CSV columns", () => {
    const panel = figure.panels[0];
    expect(panel.aMin).toBeGreaterThan(0.9);
    expect(panel.aMax).toBeCloseTo(2 - panel.aMin, 12);
    const svg = renderFigure(figure);
    expect(svg).toContain("a_min=");
  });
});

describe("hard-regime figure (two weight variants)", () => {
  const rows = parseConvergenceCsv(readFixture("hard_convergence.csv"));
  const figure = buildPanels(rows);

  it("renders one panel with two grouped curves", () => {
    expect(figure.panels).toHaveLength(1);
    const names = figure.panels[0].curves.map((c) => c.weights);
    expect(names).toEqual(["serendipitous", "spod"]);
    const svg = renderFigure(figure);
    expect(svg).toContain('data-weights="serendipitous"');
    expect(svg).toContain('data-weights="spod"');
    expect(svg.match(/<polyline class="curve"/g)).toHaveLength(2);
  });

  it("keeps each curve sorted by n", () => {
    for (const curve of figure.panels[0].curves) {
      const ns = curve.points.map((p) => p.n);
      expect([...ns].sort((a, b) => a - b)).toEqual(ns);
    }
  });
});

describe("synthetic inputs", () => {
  const header = "theta,c,p,s,alpha,lambda,weights,n,error,seconds,status";

  function csvOf(rows: string[]): string {
    return [header, ...rows].join("\n") + "\n";
  }

  it("runs a power law parallel to the reference line", () => {
    const p = 1 / 3.3;
    const rows = [16, 32, 64, 128, 256].map(
      (n) =>
        `3.6,0.08,${p},10,3,0.179,serendipitous,${n},${2.5 * n ** -1.4},0.1,ok`,
    );
    const figure = buildPanels(parseConvergenceCsv(csvOf(rows)));
    const panel = figure.panels[0];
    const curve = panel.curves[0];
    expect(curve.fittedSlope).toBeCloseTo(-panel.referenceSlope, 10);
  });

  it("single-row input still renders a marker and the reference", () => {
    const figure = buildPanels(parseConvergenceCsv(csvOf([
      "3.6,0.08,0.303,10,3,0.179,serendipitous,16,1e-5,0.1,ok",
    ])));
    expect(figure.panels).toHaveLength(1);
    const svg = renderFigure(figure);
    expect(svg).toContain("<circle");
    expect(svg).toContain("data-slope=");
  });

  it("drops failed rows but keeps the curve", () => {
    const figure = buildPanels(parseConvergenceCsv(csvOf([
      "2.4,0.61,0.4545,10,2,0.294,spod,16,1e-2,0.1,ok",
      "2.4,0.61,0.4545,10,2,0.294,spod,32,NaN,0.1,eigenvalue ratio too small",
      "2.4,0.61,0.4545,10,2,0.294,spod,64,1e-3,0.1,ok",
    ])));
    const curve = figure.panels[0].curves[0];
    expect(curve.points.map((q) => q.n)).toEqual([16, 64]);
    expect(curve.droppedRows).toBe(1);
  });

  it("skips an all-failed group with a warning", () => {
    const figure = buildPanels(parseConvergenceCsv(csvOf([
      "2.4,0.61,0.4545,10,2,0.294,spod,16,NaN,0.1,failed",
      "2.4,0.61,0.4545,10,2,0.294,spod,32,NaN,0.1,failed",
      "3.6,0.08,0.303,10,3,0.179,serendipitous,16,1e-5,0.1,ok",
    ])));
    expect(figure.panels).toHaveLength(1);
    expect(figure.warnings.some((w) => w.includes("skipped"))).toBe(true);
  });

  it("splits panels by (s, c) and filters on request", () => {
    const rows = [
      "3.6,0.08,0.303,10,3,0.179,serendipitous,16,1e-5,0.1,ok",
      "3.6,0.08,0.303,100,3,0.179,serendipitous,16,2e-5,0.1,ok",
      "3.6,0.61,0.303,10,3,0.179,serendipitous,16,3e-5,0.1,ok",
    ];
    expect(buildPanels(parseConvergenceCsv(csvOf(rows))).panels).toHaveLength(3);
    const filtered = buildPanels(parseConvergenceCsv(csvOf(rows)), { s: [10] });
    expect(filtered.panels).toHaveLength(2);
  });

  it("rendering is a pure function of the rows", () => {
    const text = readFixture("hard_convergence.csv");
    const a = renderFigure(buildPanels(parseConvergenceCsv(text)));
    const b = renderFigure(buildPanels(parseConvergenceCsv(text)));
    expect(a).toBe(b);
    expect(a).not.toMatch(/\d{4}-\d{2}-\d{2}/); // no timestamps anywhere
  });
});

describe("command line entry", () => {
  it("writes the figure and sidecar metadata", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "latkern-plots-"));
    const out = path.join(dir, "fig.svg");
    run(parseArgs([
      "--input", path.join(FIXTURES, "easy_convergence.csv"),
      "--output", out,
    ]));
    const svg = fs.readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
    const meta = JSON.parse(fs.readFileSync(`${out}.meta.json`, "utf-8"));
    expect(-meta.panels[0].referenceSlope).toBe(-1.4);
  });

  it("rejects unknown flags and missing output", () => {
    expect(() => parseArgs(["--frobnicate"])).toThrow(/unknown flag/);
    expect(() => parseArgs(["--input", "x.csv"])).toThrow(/--output/);
  });
});
