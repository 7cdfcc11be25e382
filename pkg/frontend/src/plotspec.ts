/**
 * The serialized plot description: a deterministic JSON structure holding
 * everything the figure shows. One panel per sample size; inside a panel,
 * one group per feature with one box per signal-to-noise level.
 *
 * Box geometry (quartiles, whisker range) is computed from the raw
 * per-replicate values. The solid mean line and the oracle star are read
 * from results.csv, never recomputed. Rendering backends may produce
 * different image bytes, but this structure is byte-stable for fixed inputs.
 */

import { parseRawCsv, parseResultsCsv, RawRow, ResultsRow, SchemaError } from "./schema.js";

export interface BoxStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  count: number;
}

export interface BoxEntry {
  sn: number;
  stats: BoxStats;
  /** Monte-Carlo mean from results.csv, drawn as the solid line in the box. */
  mean: number;
}

export interface FeatureGroup {
  feature: number;
  /** Theoretical importance from results.csv; null when the column is absent. */
  oracle: number | null;
  boxes: BoxEntry[];
}

export interface Panel {
  n: number;
  groups: FeatureGroup[];
}

export interface PlotSpec {
  figure: string;
  model: string;
  snLevels: number[];
  panels: Panel[];
  warnings: string[];
}

/** Type-7 (linear interpolation) quantile of an ascending-sorted array. */
function quantileSorted(sorted: number[], p: number): number {
  const pos = (sorted.length - 1) * p;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  return {
    min: sorted[0],
    q1: quantileSorted(sorted, 0.25),
    median: quantileSorted(sorted, 0.5),
    q3: quantileSorted(sorted, 0.75),
    max: sorted[sorted.length - 1],
    count: sorted.length,
  };
}

const key = (n: number, sn: number, feature: number) => `${n}|${sn}|${feature}`;

export function buildPlotSpec(figure: string, resultsText: string,
                              rawText: string): PlotSpec {
  const results = parseResultsCsv(resultsText);
  const raw = parseRawCsv(rawText);
  if (results.rows.length === 0) {
    throw new SchemaError("results.csv: no data rows");
  }

  const warnings: string[] = [];
  if (!results.hasOracle) {
    warnings.push("results.csv has no 'oracle' column: star markers omitted");
  }

  const rawByCell = new Map<string, number[]>();
  for (const row of raw) {
    const k = key(row.n, row.sn, row.feature);
    const bucket = rawByCell.get(k);
    if (bucket) bucket.push(row.importance);
    else rawByCell.set(k, [row.importance]);
  }

  const resultByCell = new Map<string, ResultsRow>();
  for (const row of results.rows) {
    resultByCell.set(key(row.n, row.sn, row.feature), row);
  }

  const nValues = [...new Set(results.rows.map((r) => r.n))].sort((a, b) => a - b);
  const snLevels = [...new Set(results.rows.map((r) => r.sn))].sort((a, b) => a - b);
  const features = [...new Set(results.rows.map((r) => r.feature))].sort((a, b) => a - b);
  const model = results.rows[0].model;

  const panels: Panel[] = nValues.map((n) => ({
    n,
    groups: features.map((feature) => {
      let oracle: number | null = null;
      const boxes: BoxEntry[] = snLevels.map((sn) => {
        const res = resultByCell.get(key(n, sn, feature));
        if (!res) {
          throw new SchemaError(
            `results.csv: no row for n=${n}, sn=${sn}, feature=${feature}`);
        }
        if (res.oracle !== null) oracle = res.oracle;
        const values = rawByCell.get(key(n, sn, feature));
        if (!values || values.length === 0) {
          throw new SchemaError(
            `raw.csv: no replicate values for n=${n}, sn=${sn}, feature=${feature}`,
            "importance");
        }
        return { sn, stats: boxStats(values), mean: res.mc_mean };
      });
      return { feature, oracle, boxes };
    }),
  }));

  return { figure, model, snLevels, panels, warnings };
}

/** Canonical JSON form; fixed key order makes re-serialization byte-stable. */
export function serializePlotSpec(spec: PlotSpec): string {
  return JSON.stringify(spec, null, 2) + "\n";
}
