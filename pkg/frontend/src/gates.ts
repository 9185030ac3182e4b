/** Threshold playground rules, mirrored from the service's strict O > T rule.
 *
 * These are display helpers over levels the API returned; the levels
 * themselves are never computed here.
 */

import type { GateLevels } from "./api.js";

export type TruthTable = [number, number, number, number];

const GATE_NAMES: Record<string, string> = {
  "0000": "const-0",
  "0001": "AND",
  "0101": "y",
  "0011": "x",
  "0111": "OR",
  "1111": "const-1",
  "0110": "XOR",
  "1001": "XNOR",
  "1110": "NAND",
  "1000": "NOR",
};

export function thresholdGate(levels: GateLevels, threshold: number): TruthTable {
  return [
    levels.O00 > threshold ? 1 : 0,
    levels.O01 > threshold ? 1 : 0,
    levels.O10 > threshold ? 1 : 0,
    levels.O11 > threshold ? 1 : 0,
  ];
}

export function gateName(table: TruthTable): string {
  const key = table.join("");
  return GATE_NAMES[key] ?? `f${key}`;
}

/** Every gate reachable as the slider sweeps the real line. */
export function realizableGates(levels: GateLevels): string[] {
  const sorted = [...new Set([levels.O00, levels.O01, levels.O10, levels.O11])].sort(
    (a, b) => a - b,
  );
  const thresholds = [sorted[0]! - 1];
  for (let i = 0; i + 1 < sorted.length; i++) {
    thresholds.push((sorted[i]! + sorted[i + 1]!) / 2);
  }
  thresholds.push(sorted[sorted.length - 1]!);
  const names = new Set(thresholds.map((t) => gateName(thresholdGate(levels, t))));
  return [...names].sort();
}
