/**
 * SVG figure builders for the four artifact views.
 *
 * Rendering is deterministic: fixed canvas sizes, fixed styles, coordinates
 * rounded to two decimals, no timestamps.  Each builder takes parsed tables
 * (see io.ts) and returns a complete SVG document as a string.
 */

import { Table, Report, readCsv, readReport, checkHashes } from "./io.js";

export type FigureKind =
  | "field-with-interface"
  | "loglog-oscillation"
  | "bmo-vs-scale"
  | "convergence";

export interface FigureSpec {
  kind: FigureKind;
  /** input artifact paths; meaning depends on kind (see render) */
  inputs: string[];
  output: string;
  title?: string;
}

const W = 640;
const H = 480;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 55 };

const fmt = (x: number): string => x.toFixed(2);

interface Scale {
  (x: number): number;
  ticks: number[];
}

function makeScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
  log: boolean,
): Scale {
  const a = log ? Math.log(lo) : lo;
  const b = log ? Math.log(hi) : hi;
  const span = b === a ? 1 : b - a;
  const f = (x: number) =>
    outLo + (((log ? Math.log(x) : x) - a) / span) * (outHi - outLo);
  const ticks: number[] = [];
  const n = 5;
  for (let i = 0; i <= n; i++) {
    const t = a + (span * i) / n;
    ticks.push(log ? Math.exp(t) : t);
  }
  const s = f as Scale;
  s.ticks = ticks;
  return s;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const mag = Math.abs(v);
  return mag >= 0.01 && mag < 10000 ? String(Number(v.toPrecision(3))) : v.toExponential(1);
}

function axes(
  sx: Scale,
  sy: Scale,
  xlabel: string,
  ylabel: string,
  title: string,
): string {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = W - MARGIN.right;
  const y0 = H - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  );
  for (const t of sx.ticks) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`,
      `<text x="${px}" y="${y0 + 20}" font-size="11" text-anchor="middle">${tickLabel(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const py = fmt(sy(t));
    parts.push(
      `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`,
      `<text x="${x0 - 8}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${H - 12}" font-size="13" text-anchor="middle">${xlabel}</text>`,
    `<text x="18" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 ${(y0 + y1) / 2})">${ylabel}</text>`,
    `<text x="${W / 2}" y="22" font-size="15" text-anchor="middle">${title}</text>`,
  );
  return parts.join("\n");
}

function document(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" ` +
    `viewBox="0 0 ${W} ${H}">\n<rect width="${W}" height="${H}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}

/** Blue-to-red color map on [0, 1]. */
function colorMap(t: number): string {
  const clamp = Math.max(0, Math.min(1, t));
  const r = Math.round(40 + 215 * clamp);
  const g = Math.round(60 + 60 * Math.sin(Math.PI * clamp));
  const b = Math.round(255 - 215 * clamp);
  return `rgb(${r},${g},${b})`;
}

export function fieldWithInterface(
  solution: Table,
  triangles: Table,
  iface: Table,
  title: string,
): string {
  checkHashes([solution, triangles, iface]);
  const xs = solution.data["x"];
  const ys = solution.data["y"];
  const us = solution.data["u"];
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (let i = 0; i < xs.length; i++) {
    xmin = Math.min(xmin, xs[i]);
    xmax = Math.max(xmax, xs[i]);
    ymin = Math.min(ymin, ys[i]);
    ymax = Math.max(ymax, ys[i]);
  }
  const umin = Math.min(...us);
  const umax = Math.max(...us);
  const side = Math.min(W - MARGIN.left - MARGIN.right, H - MARGIN.top - MARGIN.bottom);
  const px = (x: number) => MARGIN.left + ((x - xmin) / (xmax - xmin)) * side;
  const py = (y: number) => H - MARGIN.bottom - ((y - ymin) / (ymax - ymin)) * side;

  const parts: string[] = [];
  const v0 = triangles.data["v0"];
  const v1 = triangles.data["v1"];
  const v2 = triangles.data["v2"];
  for (let t = 0; t < triangles.rows; t++) {
    const ids = [v0[t], v1[t], v2[t]];
    const mean = (us[ids[0]] + us[ids[1]] + us[ids[2]]) / 3;
    const c = colorMap(umax > umin ? (mean - umin) / (umax - umin) : 0);
    const pts = ids
      .map((i) => `${fmt(px(xs[i]))},${fmt(py(ys[i]))}`)
      .join(" ");
    parts.push(`<polygon points="${pts}" fill="${c}" stroke="none"/>`);
  }
  const e0 = iface.data["v0"];
  const e1 = iface.data["v1"];
  for (let k = 0; k < iface.rows; k++) {
    parts.push(
      `<line x1="${fmt(px(xs[e0[k]]))}" y1="${fmt(py(ys[e0[k]]))}" ` +
        `x2="${fmt(px(xs[e1[k]]))}" y2="${fmt(py(ys[e1[k]]))}" ` +
        `stroke="black" stroke-width="1.5"/>`,
    );
  }
  parts.push(
    `<text x="${W / 2}" y="22" font-size="15" text-anchor="middle">${title}</text>`,
    `<text x="${MARGIN.left}" y="${H - 14}" font-size="11">u range [${umin.toPrecision(4)}, ${umax.toPrecision(4)}]</text>`,
  );
  return document(parts.join("\n"));
}

export function loglogOscillation(
  metrics: Table,
  report: Report,
  title: string,
): string {
  checkHashes([metrics, report]);
  const rs = metrics.data["r"];
  const osc = metrics.data["osc"];
  const pos = rs.map((_, i) => i).filter((i) => osc[i] > 0 && rs[i] > 0);
  if (pos.length === 0) {
    throw new Error(`${metrics.path}: no positive oscillation values to plot`);
  }
  const rmin = Math.min(...pos.map((i) => rs[i]));
  const rmax = Math.max(...pos.map((i) => rs[i]));
  const omin = Math.min(...pos.map((i) => osc[i]));
  const omax = Math.max(...pos.map((i) => osc[i]));
  const sx = makeScale(rmin, rmax, MARGIN.left, W - MARGIN.right, true);
  const sy = makeScale(omin, omax, H - MARGIN.bottom, MARGIN.top, true);

  const parts: string[] = [axes(sx, sy, "r", "osc(x0, r)", title)];
  for (const i of pos) {
    parts.push(
      `<circle cx="${fmt(sx(rs[i]))}" cy="${fmt(sy(osc[i]))}" r="3" fill="#3b6fb6"/>`,
    );
  }
  const alpha = report.data["alpha_hat"] as number;
  const exploratory = report.data["alpha_hat_exploratory"] === true;
  // overlay the fitted power law through the geometric mean of the cloud
  const mlr = pos.reduce((s, i) => s + Math.log(rs[i]), 0) / pos.length;
  const mlo = pos.reduce((s, i) => s + Math.log(osc[i]), 0) / pos.length;
  const line = [rmin, rmax].map((r) => {
    const o = Math.exp(mlo + alpha * (Math.log(r) - mlr));
    return `${fmt(sx(r))},${fmt(sy(Math.min(Math.max(o, omin), omax)))}`;
  });
  parts.push(
    `<polyline points="${line.join(" ")}" fill="none" stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6 3"/>`,
    `<text x="${W - MARGIN.right - 8}" y="${MARGIN.top + 16}" font-size="13" text-anchor="end" fill="#c0392b">alpha_hat = ${alpha.toFixed(3)}${exploratory ? " (exploratory)" : ""}</text>`,
  );
  return document(parts.join("\n"));
}

export function bmoVsScale(metrics: Table, title: string): string {
  const rs = metrics.data["r"];
  const bmo = metrics.data["bmo"];
  const cx = metrics.raw["center_x"];
  const cy = metrics.raw["center_y"];
  const rmin = Math.min(...rs);
  const rmax = Math.max(...rs);
  const bmax = Math.max(...bmo);
  const sx = makeScale(rmin, rmax, MARGIN.left, W - MARGIN.right, true);
  const sy = makeScale(0, bmax * 1.05, H - MARGIN.bottom, MARGIN.top, false);

  const parts: string[] = [axes(sx, sy, "r", "M(x0, r)", title)];
  // one polyline per center, in file order
  const byCenter = new Map<string, number[]>();
  for (let i = 0; i < metrics.rows; i++) {
    const key = `${cx[i]}|${cy[i]}`;
    if (!byCenter.has(key)) byCenter.set(key, []);
    byCenter.get(key)!.push(i);
  }
  let k = 0;
  for (const idx of byCenter.values()) {
    const hue = (k * 47) % 360;
    const pts = idx
      .slice()
      .sort((a, b) => rs[a] - rs[b])
      .map((i) => `${fmt(sx(rs[i]))},${fmt(sy(bmo[i]))}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="hsl(${hue},60%,45%)" stroke-width="1.2"/>`,
    );
    k++;
  }
  return document(parts.join("\n"));
}

export function convergence(conv: Table, title: string): string {
  const hs = conv.data["h"];
  const l2 = conv.data["l2_error"];
  const linf = conv.data["linf_error"];
  const eoc = conv.raw["eoc_l2"];
  const all = [...l2, ...linf];
  const sx = makeScale(Math.min(...hs), Math.max(...hs), MARGIN.left, W - MARGIN.right, true);
  const sy = makeScale(Math.min(...all), Math.max(...all), H - MARGIN.bottom, MARGIN.top, true);

  const parts: string[] = [axes(sx, sy, "h", "error", title)];
  const series: Array<[number[], string, string]> = [
    [l2, "#3b6fb6", "L2"],
    [linf, "#c0392b", "Linf"],
  ];
  for (const [vals, color, label] of series) {
    const order = hs.map((_, i) => i).sort((a, b) => hs[a] - hs[b]);
    const pts = order.map((i) => `${fmt(sx(hs[i]))},${fmt(sy(vals[i]))}`).join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
    for (const i of order) {
      parts.push(
        `<circle cx="${fmt(sx(hs[i]))}" cy="${fmt(sy(vals[i]))}" r="3" fill="${color}"/>`,
      );
    }
    const last = order[order.length - 1];
    parts.push(
      `<text x="${fmt(sx(hs[last]) + 6)}" y="${fmt(sy(vals[last]))}" font-size="12" fill="${color}">${label}</text>`,
    );
  }
  // EOC annotations beside each refinement step
  for (let i = 0; i < conv.rows; i++) {
    if (eoc[i] !== "") {
      const rate = Number(eoc[i]);
      parts.push(
        `<text x="${fmt(sx(hs[i]))}" y="${fmt(sy(l2[i]) - 10)}" font-size="11" text-anchor="middle">EOC ${rate.toFixed(2)}</text>`,
      );
    }
  }
  return document(parts.join("\n"));
}

/** Read inputs, verify hashes, and build the figure named by the spec. */
export function render(spec: FigureSpec): string {
  const title = spec.title ?? spec.kind;
  switch (spec.kind) {
    case "field-with-interface": {
      const [sol, tri, ifc] = spec.inputs;
      return fieldWithInterface(
        readCsv(sol, ["vertex_id", "x", "y", "u"]),
        readCsv(tri, ["v0", "v1", "v2", "region"]),
        readCsv(ifc, ["v0", "v1"]),
        title,
      );
    }
    case "loglog-oscillation": {
      const [met, rep] = spec.inputs;
      return loglogOscillation(
        readCsv(met, ["center_x", "center_y", "r", "osc"]),
        readReport(rep),
        title,
      );
    }
    case "bmo-vs-scale":
      return bmoVsScale(
        readCsv(spec.inputs[0], ["center_x", "center_y", "r", "bmo"]),
        title,
      );
    case "convergence":
      return convergence(
        readCsv(spec.inputs[0], ["h", "l2_error", "linf_error", "eoc_l2"]),
        title,
      );
    default:
      throw new Error(`unknown figure kind '${spec.kind as string}'`);
  }
}
