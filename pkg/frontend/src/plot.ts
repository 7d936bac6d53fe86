import { ConvergenceRow } from "./csv.js";
import { logLogSlope, referenceSlope, zeta } from "./math.js";

export interface CurveMeta {
  weights: string;
  points: { n: number; error: number }[];
  fittedSlope: number;
  droppedRows: number; // failed rows excluded from the curve
}

export interface PanelMeta {
  s: number;
  c: number;
  theta: number;
  p: number;
  aMin: number;
  aMax: number;
  referenceSlope: number;
  referenceAnchor: { n: number; error: number };
  curves: CurveMeta[];
}

export interface FigureMetadata {
  panels: PanelMeta[];
  warnings: string[];
}

export interface GroupFilters {
  weights?: string[];
  s?: number[];
  c?: number[];
}

function matches(row: ConvergenceRow, filters: GroupFilters): boolean {
  if (filters.weights && !filters.weights.includes(row.weights)) return false;
  if (filters.s && !filters.s.includes(row.s)) return false;
  if (
    filters.c &&
    !filters.c.some((v) => Math.abs(v - row.c) <= 1e-12 * Math.max(1, Math.abs(v)))
  ) {
    return false;
  }
  return true;
}

/** Group rows into one panel per (s, c), one curve per weight variant.
 * Failed rows (error = null) are dropped from curves but counted; a group
 * whose rows all failed is skipped with a warning. */
export function buildPanels(
  rows: ConvergenceRow[],
  filters: GroupFilters = {},
): FigureMetadata {
  const kept = rows.filter((r) => matches(r, filters));
  const warnings: string[] = [];
  const groups = new Map<string, ConvergenceRow[]>();
  for (const row of kept) {
    const key = `${row.s}|${row.c.toPrecision(12)}`;
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }

  const panels: PanelMeta[] = [];
  const keys = [...groups.keys()].sort();
  for (const key of keys) {
    const bucket = groups.get(key)!;
    const usable = bucket.filter((r) => r.error !== null && r.error > 0);
    if (usable.length === 0) {
      warnings.push(`group (s=${bucket[0].s}, c=${bucket[0].c}) has no successful rows; skipped`);
      continue;
    }
    const variants = [...new Set(bucket.map((r) => r.weights))].sort();
    const curves: CurveMeta[] = [];
    for (const weights of variants) {
      const mine = bucket.filter((r) => r.weights === weights);
      const points = mine
        .filter((r) => r.error !== null && r.error > 0)
        .map((r) => ({ n: r.n, error: r.error as number }))
        .sort((a, b) => a.n - b.n);
      if (points.length === 0) {
        warnings.push(`curve ${weights} in (s=${mine[0].s}, c=${mine[0].c}) has no successful rows; omitted`);
        continue;
      }
      curves.push({
        weights,
        points,
        fittedSlope: logLogSlope(points.map((q) => q.n), points.map((q) => q.error)),
        droppedRows: mine.length - points.length,
      });
    }
    const sample = usable[0];
    const cz = sample.c * zeta(sample.theta);
    // the dashed n^-r guide is anchored at the first point of the
    // serendipitous curve when present, else of the first curve
    const anchorCurve = curves.find((cv) => cv.weights === "serendipitous") ?? curves[0];
    panels.push({
      s: sample.s,
      c: sample.c,
      theta: sample.theta,
      p: sample.p,
      aMin: 1 - cz,
      aMax: 1 + cz,
      referenceSlope: referenceSlope(sample.p),
      referenceAnchor: { ...anchorCurve.points[0] },
      curves,
    });
  }
  return { panels, warnings };
}
