import Papa from "papaparse";

/** One data row of the harness output. `error` is null for failed runs
 * (written as NaN in the file, with the reason in `status`). */
export interface ConvergenceRow {
  theta: number;
  c: number;
  p: number;
  s: number;
  alpha: number;
  lambda: number;
  weights: string;
  n: number;
  error: number | null;
  seconds: number;
  status: string;
}

export const REQUIRED_COLUMNS = [
  "theta", "c", "p", "s", "alpha", "lambda", "weights", "n",
  "error", "seconds", "status",
] as const;

export class SchemaError extends Error {}

function toNumber(field: string, raw: string, line: number): number {
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: non-numeric ${field} value ${JSON.stringify(raw)}`);
  }
  return value;
}

/** Parse the harness CSV, enforcing the documented header. */
export function parseConvergenceCsv(text: string): ConvergenceRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = REQUIRED_COLUMNS.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`missing columns: ${missing.join(", ")}`);
  }
  return parsed.data.map((raw, i) => {
    const line = i + 2; // header is line 1
    const errorRaw = raw.error.trim();
    const error = errorRaw.toLowerCase() === "nan" ? null
      : toNumber("error", errorRaw, line);
    return {
      theta: toNumber("theta", raw.theta, line),
      c: toNumber("c", raw.c, line),
      p: toNumber("p", raw.p, line),
      s: toNumber("s", raw.s, line),
      alpha: toNumber("alpha", raw.alpha, line),
      lambda: toNumber("lambda", raw.lambda, line),
      weights: raw.weights,
      n: toNumber("n", raw.n, line),
      error,
      seconds: toNumber("seconds", raw.seconds, line),
      status: raw.status,
    };
  });
}
