"""Cumulative opinion-flow graphs over the presentation timeline and the
edge-to-node ratio series that operationalizes convergence.

Time step t covers presentations 1..t+1, so t runs 1..n-1 and the first graph
already spans two presentations. Ratios are checked two ways per step, from
scratch and incrementally from the previous step's counts, and the two must
agree exactly (integer counts, exact division).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from converge.corpus import Corpus
from converge.extraction import STATUS_REJECTED, FlowCandidate, Viewpoint

SELECTOR_ALL = "all"  # every flow not explicitly rejected
SELECTOR_ACCEPTED = "accepted"  # only flows an expert agreed with
SELECTORS = (SELECTOR_ALL, SELECTOR_ACCEPTED)


class TemporalError(ValueError):
    pass


@dataclass(frozen=True)
class FlowGraph:
    t: int
    node_ids: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]  # collapsed (source id, target id) pairs


@dataclass(frozen=True)
class RatioEntry:
    t: int
    nodes: int
    edges: int
    ratio: float
    n_new: int
    e_new: int


@dataclass(frozen=True)
class RatioSeries:
    entries: tuple[RatioEntry, ...]

    def to_payload(self) -> dict:
        return {
            "entries": [
                {
                    "t": e.t, "nodes": e.nodes, "edges": e.edges,
                    "ratio": e.ratio, "n_new": e.n_new, "e_new": e.e_new,
                }
                for e in self.entries
            ]
        }

    def to_csv(self) -> str:
        lines = ["t,V,E,r"]
        lines += [f"{e.t},{e.nodes},{e.edges},{e.ratio}" for e in self.entries]
        return "\n".join(lines) + "\n"


def select_flows(flows: Sequence[FlowCandidate], selector: str) -> list[FlowCandidate]:
    if selector not in SELECTORS:
        raise TemporalError(f"selector must be one of {SELECTORS}, got {selector!r}")
    if selector == SELECTOR_ACCEPTED:
        return [f for f in flows if f.status == "accepted"]
    return [f for f in flows if f.status != STATUS_REJECTED]


def build_cumulative_graphs(
    corpus: Corpus,
    viewpoints_by_presentation: Mapping[str, Sequence[Viewpoint]],
    flows: Sequence[FlowCandidate],
) -> list[FlowGraph]:
    """Nested graphs G(1)..G(n-1); multi-edges between the same viewpoint pair
    collapse to one edge so duplicate proposals cannot inflate the ratio."""
    presentations = list(corpus.presentations)
    if len(presentations) < 2:
        raise TemporalError("cumulative graphs need at least 2 presentations")

    order_of: dict[str, int] = {}
    for pres in presentations:
        for view in viewpoints_by_presentation.get(pres.id, []):
            order_of[view.id] = pres.order_index
    for flow in flows:
        for endpoint in (flow.source.viewpoint_id, flow.target.viewpoint_id):
            if endpoint not in order_of:
                raise TemporalError(f"flow references unknown viewpoint {endpoint}")

    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for flow in flows:
        pair = (flow.source.viewpoint_id, flow.target.viewpoint_id)
        if pair in seen:
            continue
        seen.add(pair)
        pairs.append(pair)

    graphs: list[FlowGraph] = []
    nodes: list[str] = [
        v.id for v in viewpoints_by_presentation.get(presentations[0].id, [])
    ]
    for t in range(1, len(presentations)):
        pres = presentations[t]
        nodes = nodes + [v.id for v in viewpoints_by_presentation.get(pres.id, [])]
        horizon = pres.order_index
        edges = tuple(
            pair for pair in pairs if order_of[pair[1]] <= horizon
        )
        graphs.append(FlowGraph(t=t, node_ids=tuple(nodes), edges=edges))
    return graphs


def ratio_series(graphs: Sequence[FlowGraph], initial_nodes: int = 0) -> RatioSeries:
    """Edge-to-node ratio per step, computed by two independent routes that
    must agree exactly: a batch route counting the materialized graph, and an
    incremental route adding set-difference deltas to the previous counts.

    `initial_nodes` is the node count before the first graph (the opening
    presentation's viewpoints), so the first entry's deltas are meaningful.
    """
    if not graphs:
        raise TemporalError("ratio series needs at least one graph")
    entries: list[RatioEntry] = []
    prev_node_set: set[str] | None = None
    prev_edge_set: set[tuple[str, str]] = set()
    prev_nodes, prev_edges = initial_nodes, 0
    for graph in graphs:
        node_set, edge_set = set(graph.node_ids), set(graph.edges)
        if len(node_set) != len(graph.node_ids) or len(edge_set) != len(graph.edges):
            raise TemporalError(f"duplicate nodes or edges at t={graph.t}")
        if not node_set:
            raise TemporalError(f"graph at t={graph.t} has no nodes")
        if prev_node_set is None:
            # no earlier graph to diff against; the opening presentation
            # contributes `initial_nodes` nodes and no edges
            n_new = len(node_set) - initial_nodes
            e_new = len(edge_set)
            if n_new < 0:
                raise TemporalError("initial_nodes exceeds the first graph's node count")
        else:
            if not (prev_node_set <= node_set and prev_edge_set <= edge_set):
                raise TemporalError(f"graphs are not nested at t={graph.t}")
            n_new = len(node_set - prev_node_set)
            e_new = len(edge_set - prev_edge_set)
        batch = Fraction(len(edge_set), len(node_set))
        incremental = Fraction(prev_edges + e_new, prev_nodes + n_new)
        if batch != incremental:
            raise TemporalError(
                f"incremental ratio {incremental} != batch ratio {batch} at t={graph.t}"
            )
        entries.append(
            RatioEntry(
                t=graph.t,
                nodes=len(node_set),
                edges=len(edge_set),
                ratio=len(edge_set) / len(node_set),
                n_new=n_new,
                e_new=e_new,
            )
        )
        prev_node_set, prev_edge_set = node_set, edge_set
        prev_nodes, prev_edges = len(node_set), len(edge_set)
    return RatioSeries(entries=tuple(entries))


@dataclass(frozen=True)
class TrendReport:
    deltas: tuple[float, ...]  # ratio change per step, aligned with entries[1:]
    decreases: tuple[int, ...]  # t values where the ratio dropped
    responsible: dict[int, str]  # decrease t -> presentation id added at that step
    slope: float
    verdict: str

    def to_payload(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "decreases": list(self.decreases),
            "responsible": {str(t): pid for t, pid in self.responsible.items()},
            "slope": self.slope,
            "verdict": self.verdict,
        }


def least_squares_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mean_x, mean_y = sum(xs) / n, sum(ys) / n
    covariance = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    variance = sum((x - mean_x) ** 2 for x in xs)
    if variance == 0:
        raise TemporalError("slope undefined for a single time point")
    return covariance / variance


def trend_report(
    series: RatioSeries, presentation_by_order: Mapping[int, str] | None = None
) -> TrendReport:
    """Per-step deltas, decreasing steps labeled by the t of the later entry,
    least-squares slope of r over t, and a convergence verdict."""
    entries = series.entries
    if len(entries) < 2:
        raise TemporalError("trend report needs at least 2 entries")
    deltas: list[float] = []
    decreases: list[int] = []
    responsible: dict[int, str] = {}
    for prev, cur in zip(entries, entries[1:]):
        deltas.append(cur.ratio - prev.ratio)
        if cur.ratio < prev.ratio:
            decreases.append(cur.t)
            if presentation_by_order is not None:
                # step t incorporates the presentation at order t+1
                pid = presentation_by_order.get(cur.t + 1)
                if pid is not None:
                    responsible[cur.t] = pid
    slope = least_squares_slope([e.t for e in entries], [e.ratio for e in entries])
    if abs(slope) < 1e-12:
        verdict = "no change"
    elif slope > 0:
        verdict = "converging: edge-to-node ratio trends upward"
    else:
        verdict = "diverging: edge-to-node ratio trends downward"
    return TrendReport(
        deltas=tuple(deltas),
        decreases=tuple(decreases),
        responsible=responsible,
        slope=slope,
        verdict=verdict,
    )


def flow_map_payload(
    corpus: Corpus,
    viewpoints_by_presentation: Mapping[str, Sequence[Viewpoint]],
    flows: Sequence[FlowCandidate],
) -> dict:
    """Timeline export: presentations as columns, viewpoints as nodes, flows
    as directed arcs carrying kind, reasoning, and review status."""
    return {
        "presentations": [
            {
                "id": pres.id,
                "order_index": pres.order_index,
                "presenter": pres.presenter,
                "domain": pres.domain_code,
            }
            for pres in corpus.presentations
        ],
        "nodes": [
            {"id": v.id, "nabc": v.nabc, "presentation": pres.id}
            for pres in corpus.presentations
            for v in viewpoints_by_presentation.get(pres.id, [])
        ],
        "edges": [
            {
                "source": f.source.viewpoint_id,
                "target": f.target.viewpoint_id,
                "kind": f.kind,
                "reasoning": f.reasoning,
                "status": f.status,
            }
            for f in flows
        ],
    }
