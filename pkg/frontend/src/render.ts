#!/usr/bin/env node
/**
 * Figure renderer for the verification toolkit's CSV artifacts.
 *
 * Usage: node dist/src/render.js --spec spec.json
 *
 * The spec file holds one figure description or a list of them:
 *   { "kind": "KernelHierarchy" | "DecorrelationLogLog" |
 *             "ConvergenceSweep" | "CovarianceCurve",
 *     "input": "path/to.csv", "output": "path/to.svg" }
 *
 * Figures are read-only consumers of the CSV schemas: no statistics are
 *  recomputed here (slopes and constants come from the CSV metadata).
 */
import { readFileSync, writeFileSync } from "fs";
import { CsvTable, column, readCsv, requireColumns } from "./csv.js";
import { Series, renderChart } from "./svg.js";

export type FigureKind =
  | "KernelHierarchy"
  | "DecorrelationLogLog"
  | "ConvergenceSweep"
  | "CovarianceCurve";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  title?: string;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function positivePairs(x: number[], y: number[]): { x: number[]; y: number[] } {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < x.length; i++) {
    if (x[i] > 0 && y[i] > 0 && Number.isFinite(y[i])) {
      xs.push(x[i]);
      ys.push(y[i]);
    }
  }
  return { x: xs, y: ys };
}

function kernelHierarchy(table: CsvTable, title?: string): string {
  requireColumns(table, ["t", "k1", "k2", "cross"]);
  const t = column(table, "t");
  const names: [string, string][] = [
    ["k1", "self kernel 1"],
    ["k2", "self kernel 2"],
    ["cross", "cross kernel"],
  ];
  const series: Series[] = names.map(([col, label], i) => {
    const expKey = col === "cross" ? "exponent_cross" : `exponent_${col}`;
    const exp = table.metadata[expKey];
    const p = positivePairs(t, column(table, col));
    return {
      ...p,
      color: PALETTE[i],
      label: exp !== undefined ? `${label} (t^${exp})` : label,
    };
  });
  const annotations = [
    `short-time exponents: ${table.metadata["exponent_k1"] ?? "?"}, ` +
      `${table.metadata["exponent_k2"] ?? "?"}, ${table.metadata["exponent_cross"] ?? "?"}`,
  ];
  return renderChart({
    title: title ?? "Kernel regularity hierarchy",
    xLabel: "t",
    yLabel: "kernel value",
    logX: true,
    logY: true,
    series,
    annotations,
  });
}

function decorrelationLogLog(table: CsvTable, title?: string): string {
  requireColumns(table, ["t", "rho"]);
  const { x, y } = positivePairs(column(table, "t"), column(table, "rho"));
  const series: Series[] = [
    { x, y, color: PALETTE[0], label: "correlation" },
  ];
  const slope = Number(table.metadata["slope"]);
  const cRho = Number(table.metadata["c_rho"]);
  const annotations: string[] = [];
  if (Number.isFinite(slope) && Number.isFinite(cRho) && x.length > 0) {
    // asymptote line c_rho * t^slope over the short-time half of the data
    const xs = x.filter((v) => v <= x[Math.floor(x.length / 2)]);
    series.push({
      x: xs,
      y: xs.map((v) => cRho * Math.pow(v, slope)),
      color: PALETTE[1],
      label: `asymptote slope ${slope}`,
      dash: "6,4",
    });
    annotations.push(`overlay: ${cRho.toPrecision(4)} * t^${slope}`);
  }
  return renderChart({
    title: title ?? "Short-time decorrelation",
    xLabel: "t",
    yLabel: "corr(V1_t, V2_t)",
    logX: true,
    logY: true,
    series,
    annotations,
  });
}

function convergenceSweep(table: CsvTable, title?: string): string {
  requireColumns(table, ["T", "l2_self_1", "l2_self_2", "l2_cross", "l1_product"]);
  const T = column(table, "T");
  const cols = ["l2_self_1", "l2_self_2", "l2_cross", "l1_product"];
  const series: Series[] = cols.map((c, i) => ({
    ...positivePairs(T, column(table, c)),
    color: PALETTE[i],
    label: c,
  }));
  return renderChart({
    title: title ?? "Renormalized-kernel convergence sweep",
    xLabel: "horizon T",
    yLabel: "distance to limit",
    logX: true,
    logY: true,
    series,
  });
}

function covarianceCurve(table: CsvTable, title?: string): string {
  requireColumns(table, ["t", "value"]);
  const series: Series[] = [
    {
      x: column(table, "t"),
      y: column(table, "value"),
      color: PALETTE[0],
      label: "Cov(V1_t, V2_t)",
    },
  ];
  return renderChart({
    title: title ?? "Covariance of the limit pair",
    xLabel: "t",
    yLabel: "covariance",
    series,
  });
}

export function renderFigure(spec: FigureSpec): string {
  const table = readCsv(spec.input);
  switch (spec.kind) {
    case "KernelHierarchy":
      return kernelHierarchy(table, spec.title);
    case "DecorrelationLogLog":
      return decorrelationLogLog(table, spec.title);
    case "ConvergenceSweep":
      return convergenceSweep(table, spec.title);
    case "CovarianceCurve":
      return covarianceCurve(table, spec.title);
    default:
      throw new Error(`unknown figure kind '${(spec as FigureSpec).kind}'`);
  }
}

export function renderSpecFile(path: string): string[] {
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  const specs: FigureSpec[] = Array.isArray(raw) ? raw : [raw];
  const written: string[] = [];
  for (const spec of specs) {
    for (const field of ["kind", "input", "output"]) {
      if (!(field in spec)) {
        throw new Error(`figure spec is missing '${field}'`);
      }
    }
    const svg = renderFigure(spec);
    writeFileSync(spec.output, svg);
    written.push(spec.output);
  }
  return written;
}

function main(argv: string[]): number {
  const idx = argv.indexOf("--spec");
  if (idx < 0 || idx + 1 >= argv.length) {
    console.error("usage: render --spec spec.json");
    return 2;
  }
  try {
    for (const out of renderSpecFile(argv[idx + 1])) {
      console.log(`wrote ${out}`);
    }
  } catch (err) {
    console.error(String(err));
    return 1;
  }
  return 0;
}

const isMain = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
