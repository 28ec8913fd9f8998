import { describe, expect, it } from "vitest";

import { buildRatioChart, polylinePoints } from "../src/ratio.js";
import type { RatioPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const before = fixture<RatioPayload>("ratio_before.json");

describe("ratio chart model", () => {
  it("plots one point per step and marks the dips", () => {
    const model = buildRatioChart(before);
    expect(model.points).toHaveLength(10); // 11 presentations -> t = 1..10
    expect(model.dips.map((d) => d.t)).toEqual([6, 10]);
    expect(model.dips.map((d) => d.presentation)).toEqual(["p07", "p11"]);
    expect(model.slope).toBeGreaterThan(0);
    expect(model.verdict).toContain("converging");
    expect(model.selector).toBe("all");
  });

  it("scales the polyline into the drawing box", () => {
    const model = buildRatioChart(before);
    const points = polylinePoints(model, 360, 180);
    const pairs = points.split(" ");
    expect(pairs).toHaveLength(model.points.length);
    for (const pair of pairs) {
      const [x, y] = pair.split(",").map(Number);
      expect(x).toBeGreaterThanOrEqual(24);
      expect(x).toBeLessThanOrEqual(336);
      expect(y).toBeGreaterThanOrEqual(24);
      expect(y).toBeLessThanOrEqual(156);
    }
  });

  it("handles an empty series without a trend", () => {
    const model = buildRatioChart({ entries: [], trend: null, meta: { selector: "all" } });
    expect(model.points).toHaveLength(0);
    expect(model.slope).toBeNull();
    expect(model.verdict).toBe("not enough data");
    expect(polylinePoints(model, 360, 180)).toBe("");
  });
});
