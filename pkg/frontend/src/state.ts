import type { GraphPayload, Nabc } from "./types.js";

export interface CameraPose {
  position: [number, number, number];
  target: [number, number, number];
}

export const DEFAULT_CAMERA: CameraPose = {
  position: [0, 0, 6],
  target: [0, 0, 0],
};

// Client view state. Invariants: percentile stays inside (0, 100) and the
// selection always refers to a node of the graph currently on screen.
export class ViewState {
  percentile = 90;
  mode: "above" | "below" = "above";
  selectedNode: string | null = null;
  flowSelector: "all" | "accepted" = "all";
  reviewCursor = 0;
  camera: CameraPose = DEFAULT_CAMERA;
  relaxationEnabled = false; // non-canonical smoothing, off by default
  readonly activeDomains = new Set<string>();
  readonly activeKinds = new Set<Nabc>();

  setPercentile(value: number): void {
    if (!Number.isFinite(value) || value <= 0 || value >= 100) {
      throw new RangeError(`percentile must be in (0, 100), got ${value}`);
    }
    this.percentile = value;
  }

  setMode(mode: "above" | "below"): void {
    this.mode = mode;
  }

  select(nodeId: string | null, graph: GraphPayload): void {
    if (nodeId !== null && !graph.nodes.some((n) => n.id === nodeId)) {
      throw new RangeError(`selected node ${nodeId} is not in the current graph`);
    }
    this.selectedNode = nodeId;
  }

  // Call after every re-query: a tighter threshold may drop the selection.
  reconcileSelection(graph: GraphPayload): void {
    if (this.selectedNode !== null && !graph.nodes.some((n) => n.id === this.selectedNode)) {
      this.selectedNode = null;
    }
  }

  toggleDomain(code: string): void {
    if (this.activeDomains.has(code)) {
      this.activeDomains.delete(code);
    } else {
      this.activeDomains.add(code);
    }
  }

  toggleKind(kind: Nabc): void {
    if (this.activeKinds.has(kind)) {
      this.activeKinds.delete(kind);
    } else {
      this.activeKinds.add(kind);
    }
  }

  // Empty filter sets mean "show everything".
  domainVisible(code: string): boolean {
    return this.activeDomains.size === 0 || this.activeDomains.has(code);
  }

  kindVisible(kind: Nabc): boolean {
    return this.activeKinds.size === 0 || this.activeKinds.has(kind);
  }
}
