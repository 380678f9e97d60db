import { readFileSync } from "fs";

/** Exact column order emitted by `qkdsim rates`; anything else is rejected. */
export const RATES_HEADER = [
  "length_km",
  "total_loss_db",
  "mu",
  "eta",
  "p_signal",
  "p_dark",
  "p_click",
  "qber",
  "sifted_rate_hz",
  "secure_fraction",
  "secure_rate_hz",
  "insecure",
] as const;

export const MEASURED_HEADER = ["length_km", "qber", "rate_hz", "source"] as const;

export class SchemaError extends Error {}

export interface RatePoint {
  length_km: number;
  total_loss_db: number;
  mu: number;
  eta: number;
  p_signal: number;
  p_dark: number;
  p_click: number;
  qber: number;
  sifted_rate_hz: number;
  secure_fraction: number;
  secure_rate_hz: number;
  insecure: boolean;
}

export interface MeasuredPoint {
  length_km: number;
  qber: number | null;
  rate_hz: number | null;
  source: string;
}

function splitNonEmptyLines(text: string): string[] {
  return text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

function parseNumber(cell: string, column: string, line: number): number {
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: column ${column} is not a finite number: "${cell}"`);
  }
  return value;
}

export function parseRatesCsv(path: string): RatePoint[] {
  const lines = splitNonEmptyLines(readFileSync(path, "utf8"));
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  if (lines[0] !== RATES_HEADER.join(",")) {
    throw new SchemaError(`${path}: header mismatch, expected "${RATES_HEADER.join(",")}"`);
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== RATES_HEADER.length) {
      throw new SchemaError(`line ${i + 2}: expected ${RATES_HEADER.length} columns, got ${cells.length}`);
    }
    const insecure = cells[11];
    if (insecure !== "true" && insecure !== "false") {
      throw new SchemaError(`line ${i + 2}: insecure must be true/false, got "${insecure}"`);
    }
    const num = (j: number) => parseNumber(cells[j], RATES_HEADER[j], i + 2);
    return {
      length_km: num(0),
      total_loss_db: num(1),
      mu: num(2),
      eta: num(3),
      p_signal: num(4),
      p_dark: num(5),
      p_click: num(6),
      qber: num(7),
      sifted_rate_hz: num(8),
      secure_fraction: num(9),
      secure_rate_hz: num(10),
      insecure: insecure === "true",
    };
  });
}

export function parseMeasuredCsv(path: string): MeasuredPoint[] {
  const lines = splitNonEmptyLines(readFileSync(path, "utf8"));
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  if (lines[0] !== MEASURED_HEADER.join(",")) {
    throw new SchemaError(`${path}: header mismatch, expected "${MEASURED_HEADER.join(",")}"`);
  }
  return lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== MEASURED_HEADER.length) {
      throw new SchemaError(`line ${i + 2}: expected ${MEASURED_HEADER.length} columns, got ${cells.length}`);
    }
    return {
      length_km: parseNumber(cells[0], "length_km", i + 2),
      qber: cells[1] === "" ? null : parseNumber(cells[1], "qber", i + 2),
      rate_hz: cells[2] === "" ? null : parseNumber(cells[2], "rate_hz", i + 2),
      source: cells[3],
    };
  });
}
