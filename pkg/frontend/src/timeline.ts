import { NABC_COLORS, STATUS_STYLES } from "./colors.js";
import type { FlowMapPayload, FlowStatus, FlowKind, Nabc } from "./types.js";

// Flow timeline: presentations as columns in presentation order, viewpoints
// stacked inside their column colored by kind, and directed arcs between
// columns styled by flow kind and review status.

export interface TimelineNode {
  id: string;
  nabc: Nabc;
  color: string;
  column: number;
  row: number;
}

export interface TimelineColumn {
  presentation: string;
  order: number;
  presenter: string;
  domain: string;
  nodes: TimelineNode[];
}

export interface TimelineArc {
  source: string;
  target: string;
  kind: FlowKind;
  status: FlowStatus;
  dashed: boolean;
  opacity: number;
  sameKind: boolean;
}

export interface TimelineModel {
  columns: TimelineColumn[];
  arcs: TimelineArc[];
}

export function buildTimeline(flows: FlowMapPayload): TimelineModel {
  const ordered = [...flows.presentations].sort((a, b) => a.order_index - b.order_index);
  const columnOf = new Map(ordered.map((p, i) => [p.id, i]));

  const columns: TimelineColumn[] = ordered.map((p) => ({
    presentation: p.id,
    order: p.order_index,
    presenter: p.presenter,
    domain: p.domain,
    nodes: [],
  }));
  const nodeById = new Map<string, TimelineNode>();
  for (const node of flows.nodes) {
    const column = columnOf.get(node.presentation);
    if (column === undefined) continue;
    const entry: TimelineNode = {
      id: node.id,
      nabc: node.nabc,
      color: NABC_COLORS[node.nabc],
      column,
      row: columns[column].nodes.length,
    };
    columns[column].nodes.push(entry);
    nodeById.set(node.id, entry);
  }

  const arcs: TimelineArc[] = [];
  for (const edge of flows.edges) {
    if (!nodeById.has(edge.source) || !nodeById.has(edge.target)) continue;
    const style = STATUS_STYLES[edge.status] ?? { dashed: false, opacity: 1 };
    arcs.push({
      source: edge.source,
      target: edge.target,
      kind: edge.kind,
      status: edge.status,
      dashed: style.dashed,
      opacity: style.opacity,
      sameKind: edge.kind === "within_category",
    });
  }
  return { columns, arcs };
}
