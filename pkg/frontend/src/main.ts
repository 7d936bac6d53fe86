import fs from "node:fs";

import { parseConvergenceCsv, ConvergenceRow } from "./csv.js";
import { buildPanels, GroupFilters } from "./plot.js";
import { renderFigure } from "./svg.js";

const USAGE = `usage: plot --input results.csv [--input more.csv] --output figure.svg
                [--weights a,b] [--s 10,100] [--c 0.0816]

Reads harness CSVs and writes a log-log convergence figure (SVG) with one
panel per (s, c) group and a dashed n^-r reference line, plus a sidecar
metadata file <output>.meta.json with the plotted data and slopes.`;

interface Args {
  inputs: string[];
  output: string;
  filters: GroupFilters;
}

export function parseArgs(argv: string[]): Args {
  const inputs: string[] = [];
  let output: string | undefined;
  const filters: GroupFilters = {};
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i++;
      if (i >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[i];
    };
    switch (flag) {
      case "--input":
        inputs.push(next());
        break;
      case "--output":
        output = next();
        break;
      case "--weights":
        filters.weights = next().split(",").filter(Boolean);
        break;
      case "--s":
        filters.s = next().split(",").map(Number);
        break;
      case "--c":
        filters.c = next().split(",").map(Number);
        break;
      case "--help":
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (inputs.length === 0 || !output) {
    throw new Error("need at least one --input and an --output");
  }
  return { inputs, output, filters };
}

export function run(args: Args): void {
  const rows: ConvergenceRow[] = [];
  for (const input of args.inputs) {
    rows.push(...parseConvergenceCsv(fs.readFileSync(input, "utf-8")));
  }
  const figure = buildPanels(rows, args.filters);
  for (const warning of figure.warnings) {
    console.warn(`warning: ${warning}`);
  }
  if (figure.panels.length === 0) {
    throw new Error("no plottable groups after filtering");
  }
  fs.writeFileSync(args.output, renderFigure(figure), "utf-8");
  fs.writeFileSync(
    `${args.output}.meta.json`,
    JSON.stringify(figure, null, 2) + "\n",
    "utf-8",
  );
  console.log(`wrote ${args.output} and ${args.output}.meta.json`);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;

if (invokedDirectly) {
  try {
    run(parseArgs(process.argv.slice(2)));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    process.exit(2);
  }
}
