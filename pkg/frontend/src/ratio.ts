import type { RatioPayload } from "./types.js";

// Chart-ready view of the edge-to-node ratio series: the line itself, one
// marker per dip (with the presentation that caused it), and the verdict.

export interface RatioPoint {
  t: number;
  ratio: number;
}

export interface DipMarker {
  t: number;
  ratio: number;
  presentation: string;
}

export interface RatioChartModel {
  points: RatioPoint[];
  dips: DipMarker[];
  slope: number | null;
  verdict: string;
  selector: "all" | "accepted";
  yMax: number;
}

export function buildRatioChart(payload: RatioPayload): RatioChartModel {
  const points = payload.entries.map((e) => ({ t: e.t, ratio: e.ratio }));
  const byT = new Map(points.map((p) => [p.t, p.ratio]));
  const trend = payload.trend;
  const dips: DipMarker[] = (trend?.decreases ?? []).map((t) => ({
    t,
    ratio: byT.get(t) ?? 0,
    presentation: trend?.responsible[String(t)] ?? "",
  }));
  return {
    points,
    dips,
    slope: trend ? trend.slope : null,
    verdict: trend?.verdict ?? "not enough data",
    selector: payload.meta.selector,
    yMax: points.reduce((acc, p) => Math.max(acc, p.ratio), 0),
  };
}

// SVG polyline coordinates scaled into a width x height box with padding.
export function polylinePoints(
  model: RatioChartModel,
  width: number,
  height: number,
  pad = 24,
): string {
  if (model.points.length === 0) {
    return "";
  }
  const ts = model.points.map((p) => p.t);
  const tMin = Math.min(...ts);
  const tSpan = Math.max(1, Math.max(...ts) - tMin);
  const ySpan = model.yMax > 0 ? model.yMax : 1;
  return model.points
    .map((p) => {
      const x = pad + ((p.t - tMin) / tSpan) * (width - 2 * pad);
      const y = height - pad - (p.ratio / ySpan) * (height - 2 * pad);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
