import { domainColors } from "./colors.js";
import type { ViewState } from "./state.js";
import type { GraphPayload, LayoutPayload } from "./types.js";

// Renderer-agnostic scene description. Building it is pure data work, so it
// is unit-testable headless; the WebGL adapter just instantiates it.

export interface ScenePoint {
  id: string;
  position: [number, number, number];
  radius: number;
  color: string;
  domain: string;
  label: string;
}

export interface SceneLine {
  source: string;
  target: string;
  from: [number, number, number];
  to: [number, number, number];
  weight: number;
}

export interface LegendEntry {
  domain: string;
  color: string;
}

export interface SceneModel {
  points: ScenePoint[];
  lines: SceneLine[];
  legend: LegendEntry[];
  empty: boolean;
}

export class SceneError extends Error {}

const MIN_RADIUS = 0.04;
const RADIUS_STEP = 0.01;

export function buildSceneModel(
  graph: GraphPayload,
  layout: LayoutPayload,
  state: ViewState,
): SceneModel {
  const missing = graph.nodes.filter((n) => !(n.id in layout.positions));
  if (missing.length > 0) {
    throw new SceneError(
      `layout is missing positions for ${missing.length} nodes (first: ${missing[0].id})`,
    );
  }

  const colors = domainColors(graph.nodes.map((n) => n.domain));
  const visible = new Set<string>();
  const points: ScenePoint[] = [];
  for (const node of graph.nodes) {
    if (!state.domainVisible(node.domain) || !state.kindVisible(node.nabc)) {
      continue;
    }
    visible.add(node.id);
    points.push({
      id: node.id,
      position: layout.positions[node.id],
      radius: MIN_RADIUS + RADIUS_STEP * node.degree,
      color: colors.get(node.domain) ?? "#868e96",
      domain: node.domain,
      label: `${node.id} (${node.nabc})`,
    });
  }

  const lines: SceneLine[] = [];
  for (const edge of graph.edges) {
    if (!visible.has(edge.source) || !visible.has(edge.target)) {
      continue;
    }
    lines.push({
      source: edge.source,
      target: edge.target,
      from: layout.positions[edge.source],
      to: layout.positions[edge.target],
      weight: edge.weight,
    });
  }

  return {
    points,
    lines,
    legend: [...colors.entries()].map(([domain, color]) => ({ domain, color })),
    empty: points.length === 0,
  };
}

// Optional smoothing for threshold transitions. Not canonical: the engine's
// exported layout stays the source of truth, this only nudges a copy.
export function relaxPositions(model: SceneModel, steps = 10, springGain = 0.05): SceneModel {
  const positions = new Map(model.points.map((p) => [p.id, [...p.position] as [number, number, number]]));
  for (let step = 0; step < steps; step += 1) {
    for (const line of model.lines) {
      const a = positions.get(line.source);
      const b = positions.get(line.target);
      if (!a || !b) continue;
      for (let axis = 0; axis < 3; axis += 1) {
        const pull = springGain * line.weight * (b[axis] - a[axis]);
        a[axis] += pull;
        b[axis] -= pull;
      }
    }
  }
  return {
    ...model,
    points: model.points.map((p) => ({ ...p, position: positions.get(p.id) ?? p.position })),
    lines: model.lines.map((l) => ({
      ...l,
      from: positions.get(l.source) ?? l.from,
      to: positions.get(l.target) ?? l.to,
    })),
  };
}
