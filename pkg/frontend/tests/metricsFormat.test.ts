import { describe, expect, it } from "vitest";
import { formatMetric, fullPrecision, metricsRows } from "../src/metricsFormat.js";
import type { MetricsResults } from "../src/types.js";

describe("metric formatting", () => {
  it("shows three decimals", () => {
    expect(formatMetric(1)).toBe("1.000");
    expect(formatMetric(2 / 3)).toBe("0.667");
    expect(formatMetric(0)).toBe("0.000");
  });

  it("keeps full precision for hover text", () => {
    expect(fullPrecision(2 / 3)).toBe("0.6666666666666666");
    expect(fullPrecision(1)).toBe("1");
  });

  it("builds one row per metric plus per-class errors", () => {
    const results: MetricsResults = {
      npc: 2 / 3,
      pc: 170,
      n_classes: 2,
      nominal_range: [0, 255],
      compute_path: "histogram_l1",
      per_class_error: { "1": 0, "2": 1 / 3 },
      pairwise: null,
    };
    const rows = metricsRows(results, [1, 2]);
    expect(rows.map((r) => r.display)).toEqual(["0.667", "170.000", "0.000", "0.333"]);
    expect(rows[0].title).toBe("0.6666666666666666");
    expect(rows[1].label).toBe("PC [0, 255]");
  });
});
