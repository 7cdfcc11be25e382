/**
 * Parsing and validation of the Monte-Carlo CSV bundle.
 *
 * Two files feed a figure: `results.csv` carries the aggregated means and
 * oracle values (never recomputed here), `raw.csv` carries the per-replicate
 * importance values that give the boxes their geometry. Schema violations
 * throw a SchemaError naming the offending column.
 */

import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(message: string, readonly column?: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface ResultsRow {
  model: string;
  n: number;
  sn: number;
  feature: number;
  mc_mean: number;
  mc_se: number;
  oracle: number | null;
  gap: number | null;
}

export interface RawRow {
  model: string;
  n: number;
  sn: number;
  replicate: number;
  feature: number;
  importance: number;
  sn_hat: number | null;
}

const RESULTS_REQUIRED = ["model", "n", "sn", "feature", "mc_mean", "mc_se"];
const RAW_REQUIRED = ["model", "n", "sn", "replicate", "feature", "importance"];

interface ParsedCsv {
  header: string[];
  records: Record<string, string>[];
}

function parseCsv(text: string, label: string): ParsedCsv {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const err = parsed.errors[0];
    throw new SchemaError(`${label}: malformed CSV at row ${err.row}: ${err.message}`);
  }
  const header = parsed.meta.fields ?? [];
  return { header, records: parsed.data };
}

function requireColumns(header: string[], required: string[], label: string): void {
  for (const column of required) {
    if (!header.includes(column)) {
      throw new SchemaError(`${label}: missing required column '${column}'`, column);
    }
  }
}

function num(record: Record<string, string>, column: string, label: string,
            row: number): number {
  const value = Number(record[column]);
  if (record[column] === undefined || record[column] === "" || !Number.isFinite(value)) {
    throw new SchemaError(
      `${label}: row ${row}: column '${column}' is not a finite number ` +
      `(got '${record[column]}')`,
      column,
    );
  }
  return value;
}

function optionalNum(record: Record<string, string>, column: string): number | null {
  const cell = record[column];
  if (cell === undefined || cell === "") return null;
  const value = Number(cell);
  return Number.isFinite(value) ? value : null;
}

export interface ResultsTable {
  rows: ResultsRow[];
  hasOracle: boolean;
}

export function parseResultsCsv(text: string): ResultsTable {
  const { header, records } = parseCsv(text, "results.csv");
  requireColumns(header, RESULTS_REQUIRED, "results.csv");
  const hasOracle = header.includes("oracle");
  const rows = records.map((record, i) => ({
    model: record.model ?? "",
    n: num(record, "n", "results.csv", i + 2),
    sn: num(record, "sn", "results.csv", i + 2),
    feature: num(record, "feature", "results.csv", i + 2),
    mc_mean: num(record, "mc_mean", "results.csv", i + 2),
    mc_se: num(record, "mc_se", "results.csv", i + 2),
    oracle: hasOracle ? optionalNum(record, "oracle") : null,
    gap: header.includes("gap") ? optionalNum(record, "gap") : null,
  }));
  return { rows, hasOracle };
}

export function parseRawCsv(text: string): RawRow[] {
  const { header, records } = parseCsv(text, "raw.csv");
  requireColumns(header, RAW_REQUIRED, "raw.csv");
  const rows: RawRow[] = [];
  records.forEach((record, i) => {
    // sn-only experiments leave feature/importance blank; those rows carry
    // no box geometry and are skipped
    if (record.feature === "" && record.importance === "") return;
    rows.push({
      model: record.model ?? "",
      n: num(record, "n", "raw.csv", i + 2),
      sn: num(record, "sn", "raw.csv", i + 2),
      replicate: num(record, "replicate", "raw.csv", i + 2),
      feature: num(record, "feature", "raw.csv", i + 2),
      importance: num(record, "importance", "raw.csv", i + 2),
      sn_hat: optionalNum(record, "sn_hat"),
    });
  });
  return rows;
}
