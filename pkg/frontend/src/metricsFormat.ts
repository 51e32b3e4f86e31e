import type { MetricsResults } from "./types.js";

/** Panel display: three decimals, full precision available on hover. */
export function formatMetric(value: number): string {
  return value.toFixed(3);
}

/** Shortest round-trip representation; matches the digits the service and
 * CLI print for the same number. */
export function fullPrecision(value: number): string {
  return String(value);
}

export interface MetricsRow {
  label: string;
  display: string;
  title: string;
}

export function metricsRows(results: MetricsResults, classIds: number[]): MetricsRow[] {
  const [lo, hi] = results.nominal_range;
  const rows: MetricsRow[] = [
    { label: "NPC", display: formatMetric(results.npc), title: fullPrecision(results.npc) },
    {
      label: `PC [${lo}, ${hi}]`,
      display: formatMetric(results.pc),
      title: fullPrecision(results.pc),
    },
  ];
  for (const id of classIds) {
    const err = results.per_class_error[String(id)];
    rows.push({
      label: `class ${id} error`,
      display: formatMetric(err),
      title: fullPrecision(err),
    });
  }
  return rows;
}
