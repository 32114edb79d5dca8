import { readFileSync, writeFileSync } from "node:fs";

export interface KSweepRow {
  k: number;
  points: number;
  ratio_pct: number;
}

export interface KSweepData {
  rows: KSweepRow[];
  /** false when ratio_pct fails to be non-decreasing in k */
  monotone: boolean;
}

const REQUIRED = ["k", "points", "ratio_pct"] as const;

/**
 * Parse a capacity-sweep CSV (one row per k). Extra columns are ignored;
 * rows come back sorted by k. Retention must grow with capacity, so a
 * ratio that drops as k rises marks the data as suspect.
 */
export function parseKSweep(text: string): KSweepData {
  const lines = text.split(/\r?\n/).filter(l => l.trim().length > 0);
  if (lines.length < 2) {
    throw new Error("k-sweep CSV needs a header and at least one row");
  }
  const header = lines[0].split(",").map(c => c.trim());
  const missing = REQUIRED.filter(c => !header.includes(c));
  if (missing.length > 0) {
    throw new Error(`k-sweep CSV missing columns: ${missing.join(", ")}`);
  }
  const col = Object.fromEntries(REQUIRED.map(c => [c, header.indexOf(c)]));

  const rows: KSweepRow[] = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    const row = {
      k: Number(cells[col.k]),
      points: Number(cells[col.points]),
      ratio_pct: Number(cells[col.ratio_pct]),
    };
    for (const [name, v] of Object.entries(row)) {
      if (!Number.isFinite(v)) {
        throw new Error(`row ${i + 1}: ${name} is not a number`);
      }
    }
    return row;
  });
  rows.sort((a, b) => a.k - b.k);

  let monotone = true;
  for (let i = 1; i < rows.length; i++) {
    if (rows[i].ratio_pct < rows[i - 1].ratio_pct) monotone = false;
  }
  return { rows, monotone };
}

const W = 640;
const H = 400;
const M = { top: 36, right: 64, bottom: 44, left: 76 };

function xScale(rows: KSweepRow[]): (k: number) => number {
  const kMax = Math.max(...rows.map(r => r.k));
  const kMin = Math.min(...rows.map(r => r.k), 0);
  const span = kMax - kMin || 1;
  return k => M.left + ((k - kMin) / span) * (W - M.left - M.right);
}

/**
 * Bars for retained point counts, a marker-annotated line for ratio_pct.
 * Non-monotone input still renders, with a visible warning banner.
 */
export function renderKSweep(data: KSweepData): string {
  const { rows, monotone } = data;
  if (rows.length === 0) {
    throw new Error("no rows to plot");
  }
  const x = xScale(rows);
  const pointsMax = Math.max(...rows.map(r => r.points)) || 1;
  const ratioMax = Math.max(...rows.map(r => r.ratio_pct)) || 1;
  const plotH = H - M.top - M.bottom;
  const yPoints = (p: number) => M.top + plotH * (1 - p / pointsMax);
  const yRatio = (r: number) => M.top + plotH * (1 - r / ratioMax);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" ` +
    `viewBox="0 0 ${W} ${H}" font-family="sans-serif" font-size="12">`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(
    `<line x1="${M.left}" y1="${H - M.bottom}" x2="${W - M.right}" ` +
    `y2="${H - M.bottom}" stroke="#333"/>`);

  const barW = 22;
  for (const r of rows) {
    const bx = x(r.k) - barW / 2;
    parts.push(
      `<rect class="points-bar" x="${bx}" y="${yPoints(r.points)}" ` +
      `width="${barW}" height="${H - M.bottom - yPoints(r.points)}" ` +
      `fill="#c6dbef"><title>k=${r.k}: ${r.points} points</title></rect>`);
    parts.push(
      `<text x="${x(r.k)}" y="${H - M.bottom + 16}" text-anchor="middle">` +
      `k=${r.k}</text>`);
  }

  const line = rows.map((r, i) =>
    `${i === 0 ? "M" : "L"} ${x(r.k)} ${yRatio(r.ratio_pct)}`).join(" ");
  parts.push(`<path d="${line}" fill="none" stroke="#b3202f" stroke-width="2"/>`);

  for (const r of rows) {
    parts.push(
      `<circle class="marker" cx="${x(r.k)}" cy="${yRatio(r.ratio_pct)}" ` +
      `r="4" fill="#b3202f"/>`);
    parts.push(
      `<text class="marker-label" x="${x(r.k)}" ` +
      `y="${yRatio(r.ratio_pct) - 10}" text-anchor="middle" fill="#b3202f">` +
      `${r.ratio_pct}%</text>`);
  }

  parts.push(
    `<text x="${M.left}" y="18" font-size="13">retained points (bars) and ` +
    `ratio % (line) vs capacity k</text>`);
  if (!monotone) {
    parts.push(
      `<text class="warning" x="${W - M.right}" y="18" text-anchor="end" ` +
      `fill="#b3202f" font-weight="bold">warning: ratio not monotone in k</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function writeKSweepFigure(csvPath: string, out: string): KSweepData {
  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (err) {
    throw new Error(`cannot read ${csvPath}: ${(err as Error).message}`);
  }
  const data = parseKSweep(text);
  writeFileSync(out, renderKSweep(data));
  return data;
}
