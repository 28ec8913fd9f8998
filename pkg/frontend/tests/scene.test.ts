import { describe, expect, it } from "vitest";

import { buildSceneModel, relaxPositions, SceneError } from "../src/scene.js";
import { ViewState } from "../src/state.js";
import type { GraphPayload, LayoutPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const graph = fixture<GraphPayload>("graph_p90.json");
const layout = fixture<LayoutPayload>("layout.json");

describe("scene model", () => {
  it("renders every fixture node with one color per domain", () => {
    const model = buildSceneModel(graph, layout, new ViewState());
    expect(model.points).toHaveLength(89);
    expect(model.empty).toBe(false);

    const legendColors = new Set(model.legend.map((entry) => entry.color));
    expect(model.legend).toHaveLength(6);
    expect(legendColors.size).toBe(6);

    const pointColors = new Set(model.points.map((point) => point.color));
    expect(pointColors).toEqual(legendColors);
  });

  it("places points at engine positions and sizes them by degree", () => {
    const model = buildSceneModel(graph, layout, new ViewState());
    for (const point of model.points.slice(0, 10)) {
      expect(point.position).toEqual(layout.positions[point.id]);
    }
    const byId = new Map(graph.nodes.map((n) => [n.id, n]));
    const sorted = [...model.points].sort((a, b) => a.radius - b.radius);
    const low = byId.get(sorted[0].id)!;
    const high = byId.get(sorted[sorted.length - 1].id)!;
    expect(low.degree).toBeLessThanOrEqual(high.degree);
  });

  it("keeps only edges between visible nodes when filtering", () => {
    const state = new ViewState();
    const someDomain = graph.nodes[0].domain;
    state.toggleDomain(someDomain);
    const model = buildSceneModel(graph, layout, state);
    expect(model.points.every((p) => p.domain === someDomain)).toBe(true);
    const visible = new Set(model.points.map((p) => p.id));
    for (const line of model.lines) {
      expect(visible.has(line.source)).toBe(true);
      expect(visible.has(line.target)).toBe(true);
    }
  });

  it("flags an empty scene when filters hide everything", () => {
    const state = new ViewState();
    state.toggleDomain("NOPE");
    const model = buildSceneModel(graph, layout, state);
    expect(model.empty).toBe(true);
  });

  it("rejects a layout that misses nodes", () => {
    const partial: LayoutPayload = { ...layout, positions: { ...layout.positions } };
    delete partial.positions[graph.nodes[0].id];
    expect(() => buildSceneModel(graph, partial, new ViewState())).toThrow(SceneError);
  });

  it("relaxation moves a copy and leaves the canonical model alone", () => {
    const model = buildSceneModel(graph, layout, new ViewState());
    const before = JSON.stringify(model.points.map((p) => p.position));
    const relaxed = relaxPositions(model, 5);
    expect(JSON.stringify(model.points.map((p) => p.position))).toBe(before);
    expect(relaxed.points.map((p) => p.id)).toEqual(model.points.map((p) => p.id));
    const moved = relaxed.points.some(
      (p, i) => JSON.stringify(p.position) !== JSON.stringify(model.points[i].position),
    );
    expect(moved).toBe(true);
  });
});
