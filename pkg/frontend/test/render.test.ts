/**
 * Renderer acceptance: all four figure kinds render from the golden CSVs of a
 * reference data-export run; the kernel-hierarchy figure carries the
 * exponent annotations read from metadata; renders are deterministic and
 * degrade gracefully on empty or malformed inputs.
 */
import assert from "node:assert/strict";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import test from "node:test";

import { renderFigure, renderSpecFile, FigureSpec } from "../src/render.js";

const GOLDEN = join(import.meta.dirname ?? __dirname, "..", "..", "golden");

const FIGURES: [FigureSpec["kind"], string][] = [
  ["KernelHierarchy", "kernel_hierarchy.csv"],
  ["DecorrelationLogLog", "decorrelation_curve.csv"],
  ["ConvergenceSweep", "kernel_converge.csv"],
  ["CovarianceCurve", "covariance_curve.csv"],
];

for (const [kind, file] of FIGURES) {
  test(`renders ${kind} from the golden artifacts`, () => {
    const svg = renderFigure({ kind, input: join(GOLDEN, file), output: "-" });
    assert.ok(svg.startsWith("<svg"));
    assert.ok(svg.includes("</svg>"));
    assert.ok(svg.includes("polyline"), "expected at least one data series");
  });
}

test("kernel hierarchy annotates the three exponents from metadata", () => {
  const svg = renderFigure({
    kind: "KernelHierarchy",
    input: join(GOLDEN, "kernel_hierarchy.csv"),
    output: "-",
  });
  for (const exp of ["-0.40", "-0.20", "+0.40"]) {
    assert.ok(svg.includes(exp), `missing exponent annotation ${exp}`);
  }
});

test("decorrelation overlay uses the metadata slope, not a recomputed fit", () => {
  const svg = renderFigure({
    kind: "DecorrelationLogLog",
    input: join(GOLDEN, "decorrelation_curve.csv"),
    output: "-",
  });
  assert.ok(svg.includes("asymptote slope 0.6"));
});

test("repeated renders are byte-identical", () => {
  const spec: FigureSpec = {
    kind: "ConvergenceSweep",
    input: join(GOLDEN, "kernel_converge.csv"),
    output: "-",
  };
  assert.equal(renderFigure(spec), renderFigure(spec));
});

test("empty-data csv renders empty axes without crashing", () => {
  const dir = mkdtempSync(join(tmpdir(), "rhlfig-"));
  const path = join(dir, "empty.csv");
  writeFileSync(path, "# note: empty\nt,value\n");
  const svg = renderFigure({ kind: "CovarianceCurve", input: path, output: "-" });
  assert.ok(svg.startsWith("<svg"));
  assert.ok(!svg.includes("polyline"));
});

test("schema mismatch names the missing column", () => {
  const dir = mkdtempSync(join(tmpdir(), "rhlfig-"));
  const path = join(dir, "bad.csv");
  writeFileSync(path, "t,wrong\n0.1,1\n");
  assert.throws(
    () => renderFigure({ kind: "CovarianceCurve", input: path, output: "-" }),
    /missing column 'value'/
  );
});

test("spec-file driver writes every output", () => {
  const dir = mkdtempSync(join(tmpdir(), "rhlfig-"));
  const specPath = join(dir, "spec.json");
  const specs = FIGURES.map(([kind, file], i) => ({
    kind,
    input: join(GOLDEN, file),
    output: join(dir, `fig${i}.svg`),
  }));
  writeFileSync(specPath, JSON.stringify(specs));
  const written = renderSpecFile(specPath);
  assert.equal(written.length, 4);
});

test("spec validation reports missing fields", () => {
  const dir = mkdtempSync(join(tmpdir(), "rhlfig-"));
  const specPath = join(dir, "spec.json");
  writeFileSync(specPath, JSON.stringify({ kind: "CovarianceCurve" }));
  assert.throws(() => renderSpecFile(specPath), /missing 'input'/);
});
