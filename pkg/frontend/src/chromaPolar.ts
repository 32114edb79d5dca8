import { writeFileSync } from "node:fs";
import { ChromaHistogram, cellCount, loadHistogram } from "./histogram.js";

export interface ChromaPanel {
  label: string;
  histogram: ChromaHistogram;
}

const PANEL = 260;      // px per panel, including padding
const PAD = 18;
const LABEL_H = 26;

// Blues ramp endpoints; intensity runs on log(1 + count)
const LOW: [number, number, number] = [237, 243, 250];
const HIGH: [number, number, number] = [8, 48, 107];

function rampColor(t: number): string {
  const c = LOW.map((lo, i) => Math.round(lo + (HIGH[i] - lo) * t));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function polar(cx: number, cy: number, r: number, angle: number): [number, number] {
  return [cx + r * Math.cos(angle), cy - r * Math.sin(angle)];
}

/** SVG path for the annular sector r0..r1, a0..a1 (radians, hue 0 due east). */
function sectorPath(cx: number, cy: number, r0: number, r1: number,
                    a0: number, a1: number): string {
  const large = a1 - a0 > Math.PI ? 1 : 0;
  const [x0, y0] = polar(cx, cy, r1, a0);
  const [x1, y1] = polar(cx, cy, r1, a1);
  let d = `M ${x0} ${y0} A ${r1} ${r1} 0 ${large} 0 ${x1} ${y1}`;
  if (r0 <= 0) {
    d += ` L ${cx} ${cy} Z`;
  } else {
    const [x2, y2] = polar(cx, cy, r0, a1);
    const [x3, y3] = polar(cx, cy, r0, a0);
    d += ` L ${x2} ${y2} A ${r0} ${r0} 0 ${large} 1 ${x3} ${y3} Z`;
  }
  return d;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/**
 * One polar heat panel per histogram, all sharing a single log(1+count)
 * color range so panels are comparable. Cells with zero count stay
 * background; a zero-count histogram renders as an empty disc.
 */
export function renderChromaPolar(panels: ChromaPanel[]): string {
  if (panels.length === 0) {
    throw new Error("no histograms to render");
  }
  const first = panels[0].histogram;
  for (const p of panels) {
    const h = p.histogram;
    if (h.hue_bins !== first.hue_bins || h.sat_bins !== first.sat_bins) {
      throw new Error(
        `histogram grids disagree: ${first.hue_bins}x${first.sat_bins} vs ` +
        `${h.hue_bins}x${h.sat_bins} (${p.label})`);
    }
  }

  const globalMax = Math.max(...panels.map(p => Math.max(...p.histogram.counts)));
  const denom = Math.log1p(globalMax);

  const width = PANEL * panels.length;
  const height = PANEL + LABEL_H;
  const radius = PANEL / 2 - PAD;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  panels.forEach((panel, idx) => {
    const h = panel.histogram;
    const cx = PANEL * idx + PANEL / 2;
    const cy = PANEL / 2;
    const dTheta = (2 * Math.PI) / h.hue_bins;
    const dR = radius / h.sat_bins;

    for (let hue = 0; hue < h.hue_bins; hue++) {
      for (let sat = 0; sat < h.sat_bins; sat++) {
        const count = cellCount(h, hue, sat);
        if (count <= 0) continue;
        const t = denom > 0 ? Math.log1p(count) / denom : 0;
        const d = sectorPath(cx, cy, sat * dR, (sat + 1) * dR,
                             hue * dTheta, (hue + 1) * dTheta);
        parts.push(
          `<path class="cell" d="${d}" fill="${rampColor(t)}">` +
          `<title>hue ${hue}, sat ${sat}: ${count}</title></path>`);
      }
    }
    parts.push(
      `<circle cx="${cx}" cy="${cy}" r="${radius}" fill="none" ` +
      `stroke="#999" stroke-width="1"/>`);
    parts.push(
      `<text class="panel-label" x="${cx}" y="${PANEL + LABEL_H - 8}" ` +
      `text-anchor="middle" font-size="14">${esc(panel.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n");
}

export function writeChromaFigure(inputs: string[], labels: string[],
                                  out: string): void {
  if (labels.length > 0 && labels.length !== inputs.length) {
    throw new Error(
      `${inputs.length} inputs but ${labels.length} labels`);
  }
  const panels = inputs.map((path, i) => ({
    label: labels[i] ?? `input ${i + 1}`,
    histogram: loadHistogram(path),
  }));
  writeFileSync(out, renderChromaPolar(panels));
}
