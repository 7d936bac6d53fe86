import { FigureMetadata, PanelMeta } from "./plot.js";

const PANEL_W = 520;
const PANEL_H = 360;
const MARGIN = { left: 70, right: 24, top: 48, bottom: 46 };

const CURVE_COLORS: Record<string, string> = {
  serendipitous: "#d62728",
  spod: "#1f77b4",
  product: "#2ca02c",
};

const FALLBACK_COLOR = "#9467bd";

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

interface Scale {
  toX(n: number): number;
  toY(err: number): number;
  nTicks: number[];
  errTicks: number[];
}

function makeScale(panel: PanelMeta): Scale {
  const ns = panel.curves.flatMap((c) => c.points.map((p) => p.n));
  const refErrs = panel.curves.flatMap((c) => c.points.map((p) => p.error));
  // include the reference guide endpoints in the y range
  const { n: an, error: ae } = panel.referenceAnchor;
  const r = panel.referenceSlope;
  for (const n of [Math.min(...ns), Math.max(...ns)]) {
    refErrs.push(ae * (n / an) ** -r);
  }
  let lo2 = Math.log2(Math.min(...ns));
  let hi2 = Math.log2(Math.max(...ns));
  if (hi2 - lo2 < 1e-9) {
    lo2 -= 0.5;
    hi2 += 0.5;
  }
  let loE = Math.log10(Math.min(...refErrs));
  let hiE = Math.log10(Math.max(...refErrs));
  if (hiE - loE < 1e-9) {
    loE -= 0.5;
    hiE += 0.5;
  }
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const nTicks = [...new Set(ns)].sort((a, b) => a - b);
  const errTicks: number[] = [];
  for (let e = Math.ceil(loE); e <= Math.floor(hiE); e++) {
    errTicks.push(e);
  }
  return {
    toX: (n) => MARGIN.left + ((Math.log2(n) - lo2) / (hi2 - lo2)) * plotW,
    toY: (err) => MARGIN.top + ((hiE - Math.log10(err)) / (hiE - loE)) * plotH,
    nTicks,
    errTicks,
  };
}

function renderPanel(panel: PanelMeta, offsetY: number): string {
  const scale = makeScale(panel);
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = PANEL_W - MARGIN.right;
  const y0 = MARGIN.top;
  const y1 = PANEL_H - MARGIN.bottom;
  parts.push(`<g transform="translate(0,${offsetY})">`);
  parts.push(
    `<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" ` +
    `fill="none" stroke="#333" stroke-width="1"/>`,
  );

  const title =
    `s=${panel.s}, θ=${fmt(panel.theta)}, p=${fmt(panel.p)}, ` +
    `a_min=${fmt(panel.aMin)}, a_max=${fmt(panel.aMax)}`;
  parts.push(
    `<text x="${PANEL_W / 2}" y="${y0 - 24}" text-anchor="middle" ` +
    `font-family="sans-serif" font-size="13">${title}</text>`,
  );

  for (const n of scale.nTicks) {
    const x = scale.toX(n);
    parts.push(`<line x1="${x.toFixed(2)}" y1="${y1}" x2="${x.toFixed(2)}" y2="${y1 + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${x.toFixed(2)}" y="${y1 + 18}" text-anchor="middle" ` +
      `font-family="sans-serif" font-size="11">${n}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${y1 + 36}" text-anchor="middle" ` +
    `font-family="sans-serif" font-size="12">n</text>`,
  );
  for (const e of scale.errTicks) {
    const y = scale.toY(10 ** e);
    parts.push(`<line x1="${x0 - 5}" y1="${y.toFixed(2)}" x2="${x0}" y2="${y.toFixed(2)}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" ` +
      `font-family="sans-serif" font-size="11">1e${e}</text>`,
    );
  }
  parts.push(
    `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
    `font-family="sans-serif" font-size="12" ` +
    `transform="rotate(-90 16 ${(y0 + y1) / 2})">error</text>`,
  );

  // dashed reference guide n^-r through the anchor
  const ns = panel.curves.flatMap((c) => c.points.map((p) => p.n));
  const nLo = Math.min(...ns);
  const nHi = Math.max(...ns);
  const { n: an, error: ae } = panel.referenceAnchor;
  const r = panel.referenceSlope;
  const gx1 = scale.toX(nLo);
  const gy1 = scale.toY(ae * (nLo / an) ** -r);
  const gx2 = scale.toX(nHi);
  const gy2 = scale.toY(ae * (nHi / an) ** -r);
  parts.push(
    `<line class="reference" data-slope="${-r}" x1="${gx1.toFixed(2)}" y1="${gy1.toFixed(2)}" ` +
    `x2="${gx2.toFixed(2)}" y2="${gy2.toFixed(2)}" stroke="#333" ` +
    `stroke-dasharray="6 4" stroke-width="1"/>`,
  );

  let legendY = y0 + 16;
  parts.push(
    `<text x="${x1 - 10}" y="${legendY}" text-anchor="end" ` +
    `font-family="sans-serif" font-size="11">n^${fmt(-r)} (dashed)</text>`,
  );
  for (const curve of panel.curves) {
    const color = CURVE_COLORS[curve.weights] ?? FALLBACK_COLOR;
    const coords = curve.points
      .map((p) => `${scale.toX(p.n).toFixed(2)},${scale.toY(p.error).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline class="curve" data-weights="${curve.weights}" points="${coords}" ` +
      `fill="none" stroke="${color}" stroke-width="1.6"/>`,
    );
    for (const p of curve.points) {
      parts.push(
        `<circle cx="${scale.toX(p.n).toFixed(2)}" cy="${scale.toY(p.error).toFixed(2)}" ` +
        `r="3" fill="${color}"/>`,
      );
    }
    legendY += 15;
    parts.push(
      `<text x="${x1 - 10}" y="${legendY}" text-anchor="end" ` +
      `font-family="sans-serif" font-size="11" fill="${color}">${curve.weights}</text>`,
    );
  }
  parts.push("</g>");
  return parts.join("\n");
}

/** Deterministic standalone SVG: one stacked panel per (s, c) group. */
export function renderFigure(figure: FigureMetadata): string {
  const height = Math.max(1, figure.panels.length) * PANEL_H;
  const body = figure.panels
    .map((panel, i) => renderPanel(panel, i * PANEL_H))
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${PANEL_W}" height="${height}" ` +
    `viewBox="0 0 ${PANEL_W} ${height}">`,
    `<rect width="${PANEL_W}" height="${height}" fill="white"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}
