#!/usr/bin/env node
/**
 * `render` command: turn a results.csv / raw.csv bundle into a figure.
 *
 * Writes the rendered SVG plus a `<out>.plotspec.json` sidecar holding the
 * serialized plot description (the deterministic artifact; image bytes are
 * backend-specific). Exit codes: 0 ok, 2 schema violation, 1 other failure.
 */

import { readFileSync, writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { buildPlotSpec, serializePlotSpec } from "./plotspec.js";
import { renderSvg } from "./render.js";
import { SchemaError } from "./schema.js";

interface RenderArgs {
  raw: string;
  results: string;
  figure: string;
  out: string;
  width: number;
}

export function runRender(args: RenderArgs): number {
  const resultsText = readFileSync(args.results, "utf-8");
  const rawText = readFileSync(args.raw, "utf-8");
  const spec = buildPlotSpec(args.figure, resultsText, rawText);
  for (const warning of spec.warnings) {
    console.warn(`warning: ${warning}`);
  }

  let outPath = args.out;
  if (outPath.toLowerCase().endsWith(".png")) {
    // no rasterizer in this environment; the SVG carries the same figure
    outPath = outPath.slice(0, -4) + ".svg";
    console.warn(`warning: PNG output unavailable, writing SVG to ${outPath}`);
  }
  writeFileSync(outPath, renderSvg(spec, args.width));
  const specPath = outPath + ".plotspec.json";
  writeFileSync(specPath, serializePlotSpec(spec));
  console.log(`wrote ${outPath} and ${specPath}`);
  return 0;
}

export function main(argv: string[]): number {
  let exitCode = 0;
  yargs(argv)
    .command<RenderArgs>(
      ["render", "$0"],
      "render a grouped-boxplot figure from a CSV bundle",
      (y) =>
        y
          .option("raw", { type: "string", demandOption: true,
                           describe: "raw.csv (per-replicate importances)" })
          .option("results", { type: "string", demandOption: true,
                               describe: "results.csv (aggregates and oracles)" })
          .option("figure", { type: "string", demandOption: true,
                              describe: "figure id used in the title" })
          .option("out", { type: "string", demandOption: true,
                           describe: "output image path (.svg; .png falls back to .svg)" })
          .option("width", { type: "number", default: 900 }),
      (args) => {
        try {
          exitCode = runRender(args);
        } catch (err) {
          if (err instanceof SchemaError) {
            console.error(`error: schema: ${err.message}`);
            exitCode = 2;
          } else {
            console.error(`error: ${(err as Error).message}`);
            exitCode = 1;
          }
        }
      },
    )
    .strict()
    .fail((msg, err) => {
      console.error(`error: ${msg ?? err?.message}`);
      exitCode = 2;
    })
    .parseSync();
  return exitCode;
}

const isMain = process.argv[1]?.endsWith("cli.js") || process.argv[1]?.endsWith("cli.ts");
if (isMain) {
  process.exit(main(hideBin(process.argv)));
}
