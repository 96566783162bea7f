/**
 * Read-only parsers for the laboratory's run artifacts.
 *
 * CSV files start with a "# config_hash=<16 hex>" comment line followed by a
 * header row; JSON reports carry a "config_hash" key.  Figures must never mix
 * artifacts from different configurations, so every parsed file surfaces its
 * hash and `checkHashes` refuses mismatched sets.
 */

import { readFileSync } from "fs";

export interface Table {
  path: string;
  hash: string;
  columns: string[];
  /** column name -> numeric values (NaN where not numeric) */
  data: Record<string, number[]>;
  /** column name -> raw string values */
  raw: Record<string, string[]>;
  rows: number;
}

export interface Report {
  path: string;
  hash: string;
  data: Record<string, unknown>;
}

const HASH_RE = /^# config_hash=([0-9a-f]+)\s*$/;

export function readCsv(path: string, required: string[]): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: too short to be a run artifact`);
  }
  const m = lines[0].match(HASH_RE);
  if (!m) {
    throw new Error(`${path}: missing config_hash header line`);
  }
  const hash = m[1];
  const columns = lines[1].split(",").map((c) => c.trim());
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new Error(`${path}: missing column '${col}'`);
    }
  }
  const raw: Record<string, string[]> = {};
  const data: Record<string, number[]> = {};
  for (const c of columns) {
    raw[c] = [];
    data[c] = [];
  }
  for (let i = 2; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(`${path}:${i + 1}: expected ${columns.length} fields`);
    }
    columns.forEach((c, j) => {
      raw[c].push(parts[j]);
      data[c].push(parts[j] === "" ? NaN : Number(parts[j]));
    });
  }
  return { path, hash, columns, data, raw, rows: lines.length - 2 };
}

export function readReport(path: string): Report {
  const data = JSON.parse(readFileSync(path, "utf8")) as Record<string, unknown>;
  const hash = data["config_hash"];
  if (typeof hash !== "string" || hash.length === 0) {
    throw new Error(`${path}: missing config_hash key`);
  }
  return { path, hash, data };
}

/** Refuse artifact sets whose config hashes disagree. */
export function checkHashes(parts: Array<{ path: string; hash: string }>): string {
  const first = parts[0];
  for (const p of parts) {
    if (p.hash !== first.hash) {
      throw new Error(
        `config hash mismatch: ${first.path} has ${first.hash}, ` +
          `${p.path} has ${p.hash}`,
      );
    }
  }
  return first.hash;
}
