/**
 * Minimal deterministic SVG chart builder: fixed fonts and sizes, value
 * formatting with stable precision, no timestamps — repeated renders of the
 * same inputs are byte-identical.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  dash?: string;
  width?: number;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  series: Series[];
  annotations?: string[];
  width?: number;
  height?: number;
}

const MARGIN = { top: 42, right: 24, bottom: 48, left: 64 };

const fmt = (v: number): string => v.toFixed(2);

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) {
    ticks.push(e);
  }
  if (ticks.length === 0) ticks.push(lo, hi);
  return ticks;
}

function tickLabel(v: number, log: boolean): string {
  if (log) return `1e${v}`;
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return parseFloat(v.toPrecision(4)).toString();
}

export function renderChart(opts: ChartOptions): string {
  const W = opts.width ?? 720;
  const H = opts.height ?? 480;
  const iw = W - MARGIN.left - MARGIN.right;
  const ih = H - MARGIN.top - MARGIN.bottom;

  const tx = (v: number) => (opts.logX ? Math.log10(v) : v);
  const ty = (v: number) => (opts.logY ? Math.log10(v) : v);

  const finite = (vals: number[]) => vals.filter((v) => Number.isFinite(v));
  const allX = finite(opts.series.flatMap((s) => s.x.map(tx)));
  const allY = finite(opts.series.flatMap((s) => s.y.map(ty)));
  const empty = allX.length === 0 || allY.length === 0;
  const [xLo, xHi] = empty ? [0, 1] : [Math.min(...allX), Math.max(...allX)];
  const [yLo0, yHi0] = empty ? [0, 1] : [Math.min(...allY), Math.max(...allY)];
  const pad = (yHi0 - yLo0 || 1) * 0.05;
  const yLo = yLo0 - pad;
  const yHi = yHi0 + pad;

  const px = (v: number) =>
    MARGIN.left + ((tx(v) - xLo) / (xHi - xLo || 1)) * iw;
  const py = (v: number) =>
    MARGIN.top + ih - ((ty(v) - yLo) / (yHi - yLo || 1)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(
    `<text x="${W / 2}" y="24" text-anchor="middle" font-family="Helvetica" font-size="15" font-weight="bold">${opts.title}</text>`
  );

  // axes frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#333" stroke-width="1"/>`
  );

  // ticks and grid
  const xt = opts.logX ? logTicks(xLo, xHi) : niceTicks(xLo, xHi);
  const yt = opts.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const v of xt) {
    const x = MARGIN.left + ((v - xLo) / (xHi - xLo || 1)) * iw;
    if (x < MARGIN.left - 0.5 || x > MARGIN.left + iw + 0.5) continue;
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${MARGIN.top + ih}" stroke="#ddd" stroke-width="0.5"/>`
    );
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + ih + 18}" text-anchor="middle" font-family="Helvetica" font-size="11">${tickLabel(v, !!opts.logX)}</text>`
    );
  }
  for (const v of yt) {
    const y = MARGIN.top + ih - ((v - yLo) / (yHi - yLo || 1)) * ih;
    if (y < MARGIN.top - 0.5 || y > MARGIN.top + ih + 0.5) continue;
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + iw}" y2="${fmt(y)}" stroke="#ddd" stroke-width="0.5"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-family="Helvetica" font-size="11">${tickLabel(v, !!opts.logY)}</text>`
    );
  }

  // axis labels
  parts.push(
    `<text x="${MARGIN.left + iw / 2}" y="${H - 10}" text-anchor="middle" font-family="Helvetica" font-size="13">${opts.xLabel}</text>`
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + ih / 2}" text-anchor="middle" font-family="Helvetica" font-size="13" transform="rotate(-90 18 ${MARGIN.top + ih / 2})">${opts.yLabel}</text>`
  );

  // series
  for (const s of opts.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const xv = tx(s.x[i]);
      const yv = ty(s.y[i]);
      if (!Number.isFinite(xv) || !Number.isFinite(yv)) continue;
      pts.push(`${fmt(px(s.x[i]))},${fmt(py(s.y[i]))}`);
    }
    if (pts.length > 0) {
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      parts.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.6}"${dash}/>`
      );
    }
  }

  // legend
  let ly = MARGIN.top + 14;
  for (const s of opts.series) {
    const lx = MARGIN.left + iw - 170;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 26}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`
    );
    parts.push(
      `<text x="${lx + 32}" y="${ly}" font-family="Helvetica" font-size="12">${s.label}</text>`
    );
    ly += 17;
  }

  // annotations (bottom-left inside the frame)
  let ay = MARGIN.top + ih - 10 - 15 * ((opts.annotations?.length ?? 1) - 1);
  for (const note of opts.annotations ?? []) {
    parts.push(
      `<text x="${MARGIN.left + 10}" y="${ay}" font-family="Helvetica" font-size="12" fill="#222">${note}</text>`
    );
    ay += 15;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
