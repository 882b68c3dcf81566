/** Pure presentation logic, kept free of DOM access so node:test can cover it.
 * Every number and label is derived from API payloads. */

import type {
  MatrixResponse,
  PatientReport,
  RawTumorValues,
  TransitionsResponse,
} from "./api.js";

export function formatPercent(value: number | null): string {
  if (value === null) {
    return "–"; // undefined rows render as an en dash, never as 0%
  }
  const pct = value * 100;
  const text = Number.isInteger(pct) ? pct.toFixed(0) : pct.toFixed(1);
  return `${text}%`;
}

/** White through deep red; undefined cells get no paint at all. */
export function heatColor(value: number | null): string {
  if (value === null) {
    return "";
  }
  const clamped = Math.max(0, Math.min(1, value));
  const lightness = 97 - clamped * 55;
  return `hsl(8 72% ${lightness.toFixed(1)}%)`;
}

export interface HeatCell {
  from: string;
  to: string;
  count: number;
  percent: number | null;
  rowDefined: boolean;
}

export function matrixCells(matrix: MatrixResponse): HeatCell[][] {
  return matrix.stage_order.map((from, i) => {
    const rowDefined = matrix.row_percent_value[i].some((cell) => cell !== null);
    return matrix.stage_order.map((to, j) => ({
      from,
      to,
      count: matrix.counts[i][j],
      percent: matrix.row_percent_value[i][j],
      rowDefined,
    }));
  });
}

/** The percentage row for one origin stage, exactly as exported by the API. */
export function matrixRow(matrix: MatrixResponse, fromCode: string): (number | null)[] {
  const index = matrix.stage_order.indexOf(fromCode);
  if (index < 0) {
    throw new Error(`unknown stage code ${fromCode}`);
  }
  return matrix.row_percent_value[index];
}

export function drillDown(
  transitions: TransitionsResponse,
  from: string,
  to: string,
): string[] {
  return transitions.changes
    .filter((entry) => entry.from_stage === from && entry.to_stage === to)
    .map((entry) => entry.patient)
    .sort();
}

/** Badge text comes from the API verbatim; the UI only chooses a CSS class. */
export function badgeClass(direction: string | null): string {
  switch (direction) {
    case "up-staged":
      return "badge badge-up";
    case "down-staged":
      return "badge badge-down";
    case "no change":
      return "badge badge-none";
    default:
      return "badge badge-unknown";
  }
}

const RAW_LABELS: [keyof RawTumorValues, string][] = [
  ["t_size_mm", "Tumor size (mm)"],
  ["positive_nodes", "Positive lymph nodes"],
  ["metastasized", "Distant metastasis"],
  ["in_situ", "Carcinoma in situ"],
  ["micrometastasis_only", "Micrometastasis only"],
  ["chest_wall_or_skin", "Chest wall / skin involvement"],
  ["grade", "Grade"],
  ["her2", "HER2"],
  ["er", "ER"],
  ["pr", "PR"],
];

export function rawValueRows(raw: RawTumorValues): [string, string][] {
  return RAW_LABELS.map(([key, label]) => {
    const value = raw[key];
    if (value === null || value === undefined) {
      return [label, "–"];
    }
    if (typeof value === "boolean") {
      return [label, value ? "yes" : "no"];
    }
    return [label, String(value)];
  });
}

export function sectionPresence(report: PatientReport): Record<string, boolean> {
  return {
    patient: true,
    staging: true,
    treatment: report.treatment_plan.length > 0,
    drugs: report.suggested_drugs.length > 0,
  };
}

/** Discards responses that arrive after the selection moved on: the last
 * selected patient/edition wins, in-flight stale responses are dropped. */
export class SelectionGate {
  private token = 0;

  next(): number {
    this.token += 1;
    return this.token;
  }

  isCurrent(token: number): boolean {
    return token === this.token;
  }
}
