import type { GraphPayload, Nabc, ViewpointsPayload } from "./types.js";

// Ego view for a clicked node: the node's own text plus every neighbor in
// the current graph, ordered strongest-similarity first.

export interface EgoNeighbor {
  id: string;
  domain: string;
  nabc: Nabc;
  weight: number;
  summary: string;
}

export interface EgoView {
  center: { id: string; domain: string; nabc: Nabc; summary: string; quote: string };
  neighbors: EgoNeighbor[];
  domains: string[];
}

function textIndex(viewpoints: ViewpointsPayload): Map<string, { summary: string; quote: string }> {
  const index = new Map<string, { summary: string; quote: string }>();
  for (const records of Object.values(viewpoints.presentations)) {
    for (const record of records) {
      index.set(record.id, { summary: record.summary, quote: record.quote });
    }
  }
  return index;
}

export function buildEgoView(
  graph: GraphPayload,
  viewpoints: ViewpointsPayload,
  selectedId: string,
): EgoView {
  const node = graph.nodes.find((n) => n.id === selectedId);
  if (!node) {
    throw new RangeError(`node ${selectedId} is not in the current graph`);
  }
  const texts = textIndex(viewpoints);
  const byId = new Map(graph.nodes.map((n) => [n.id, n]));

  const neighbors: EgoNeighbor[] = [];
  for (const edge of graph.edges) {
    let otherId: string | null = null;
    if (edge.source === selectedId) otherId = edge.target;
    if (edge.target === selectedId) otherId = edge.source;
    if (otherId === null) continue;
    const other = byId.get(otherId);
    if (!other) continue;
    neighbors.push({
      id: other.id,
      domain: other.domain,
      nabc: other.nabc,
      weight: edge.weight,
      summary: texts.get(other.id)?.summary ?? "",
    });
  }
  neighbors.sort((a, b) => b.weight - a.weight || a.id.localeCompare(b.id));

  const center = texts.get(selectedId) ?? { summary: "", quote: "" };
  return {
    center: { id: node.id, domain: node.domain, nabc: node.nabc, ...center },
    neighbors,
    domains: [...new Set(neighbors.map((n) => n.domain))].sort(),
  };
}
