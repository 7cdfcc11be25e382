import { mkdtempSync, readFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { runRender } from "../src/cli.js";
import { buildPlotSpec } from "../src/plotspec.js";
import { renderSvg } from "../src/render.js";

const fixtures = fileURLToPath(new URL("./fixtures/", import.meta.url));
const resultsText = readFileSync(join(fixtures, "results.csv"), "utf-8");
const rawText = readFileSync(join(fixtures, "raw.csv"), "utf-8");

describe("svg rendering", () => {
  const spec = buildPlotSpec("fig1", resultsText, rawText);

  it("produces an svg with panel titles and SN legend", () => {
    const svg = renderSvg(spec);
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("n = 50");
    expect(svg).toContain("n = 120");
    for (const sn of [0.5, 1, 3, 5]) {
      expect(svg).toContain(`SN=${sn}`);
    }
  });

  it("draws a star per feature group when oracles are present", () => {
    const svg = renderSvg(spec);
    // the star markers are the only elements in the oracle color
    const stars = svg.match(/fill="#1f4fd8"/g) ?? [];
    expect(stars.length).toBe(10 * spec.panels.length);
  });
});

describe("render CLI", () => {
  it("writes the image and the plot-description sidecar", () => {
    const dir = mkdtempSync(join(tmpdir(), "figures-"));
    const out = join(dir, "fig1.svg");
    const code = runRender({
      raw: join(fixtures, "raw.csv"),
      results: join(fixtures, "results.csv"),
      figure: "fig1",
      out,
      width: 700,
    });
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
    const sidecar = JSON.parse(readFileSync(out + ".plotspec.json", "utf-8"));
    expect(sidecar.figure).toBe("fig1");
    expect(sidecar.panels).toHaveLength(2);
  });

  it("falls back to svg when png is requested", () => {
    const dir = mkdtempSync(join(tmpdir(), "figures-"));
    const code = runRender({
      raw: join(fixtures, "raw.csv"),
      results: join(fixtures, "results.csv"),
      figure: "fig1",
      out: join(dir, "fig1.png"),
      width: 700,
    });
    expect(code).toBe(0);
    expect(existsSync(join(dir, "fig1.svg"))).toBe(true);
    expect(existsSync(join(dir, "fig1.svg.plotspec.json"))).toBe(true);
  });
});
