"""Human-in-the-loop validation of inferred opinion flows.

Experts review one survey item per flow: both opinions, the inferred
direction, and the model's reasoning. Verdicts move a flow from proposed to
accepted or rejected; with several reviewers the majority wins and ties go to
disagree, so contested flows drop out of downstream analyses.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from converge.corpus import Corpus
from converge.extraction import (
    STATUS_ACCEPTED,
    STATUS_PROPOSED,
    STATUS_REJECTED,
    FlowCandidate,
    Viewpoint,
)
from converge.influence import ECMatrix
from converge.semantics import SimilarityMatrix

logger = logging.getLogger(__name__)

VERDICT_PENDING = "pending"
VERDICT_AGREE = "agree"
VERDICT_DISAGREE = "disagree"


class ReviewError(ValueError):
    pass


@dataclass(frozen=True)
class SurveyItem:
    id: str  # "<source viewpoint>-><target viewpoint>"
    source: dict
    target: dict
    direction: str
    reasoning: str
    kind: str
    verdict: str = VERDICT_PENDING

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "direction": self.direction,
            "reasoning": self.reasoning,
            "kind": self.kind,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class Survey:
    items: tuple[SurveyItem, ...]

    def to_payload(self) -> dict:
        return {"items": [item.to_payload() for item in self.items]}


def _opinion_content(view: Viewpoint, presenter: str, domain: str) -> dict:
    return {
        "viewpoint_id": view.id,
        "presenter": presenter,
        "domain": domain,
        "nabc": view.nabc,
        "summary": view.summary,
        "quote": view.quote,
    }


def generate_survey(
    flows: Sequence[FlowCandidate],
    corpus: Corpus,
    viewpoints_by_presentation: Mapping[str, Sequence[Viewpoint]],
) -> Survey:
    """One pending item per flow, ordered by (source presentation, source
    viewpoint index); duplicates were already collapsed upstream."""
    lookup: dict[str, tuple[Viewpoint, str, str, int]] = {}
    for pres in corpus.presentations:
        for view in viewpoints_by_presentation.get(pres.id, []):
            lookup[view.id] = (view, pres.presenter, pres.domain_code, pres.order_index)

    items: list[tuple[tuple[int, int], SurveyItem]] = []
    seen: set[str] = set()
    for flow in flows:
        src_id, dst_id = flow.source.viewpoint_id, flow.target.viewpoint_id
        if src_id not in lookup or dst_id not in lookup:
            missing = src_id if src_id not in lookup else dst_id
            raise ReviewError(f"flow references unknown viewpoint {missing}")
        item_id = f"{src_id}->{dst_id}"
        if item_id in seen:
            continue
        seen.add(item_id)
        src_view, src_presenter, src_domain, src_order = lookup[src_id]
        dst_view, dst_presenter, dst_domain, _ = lookup[dst_id]
        item = SurveyItem(
            id=item_id,
            source=_opinion_content(src_view, src_presenter, src_domain),
            target=_opinion_content(dst_view, dst_presenter, dst_domain),
            direction=f"{src_id} influenced {dst_id}",
            reasoning=flow.reasoning,
            kind=flow.kind,
        )
        items.append(((src_order, src_view.index), item))
    if not items:
        logger.warning("no flows to review; survey is empty")
    items.sort(key=lambda pair: (pair[0], pair[1].id))
    return Survey(items=tuple(item for _, item in items))


@dataclass(frozen=True)
class DisagreementStats:
    total_items: int
    reviewed: int
    agreed: int
    disagreed: int
    disagreement_rate: float  # percent, 2 decimal places
    coverage: float  # percent of items with at least one response

    def to_payload(self) -> dict:
        return {
            "total_items": self.total_items,
            "reviewed": self.reviewed,
            "agreed": self.agreed,
            "disagreed": self.disagreed,
            "disagreement_rate": self.disagreement_rate,
            "coverage": self.coverage,
        }


def ingest_responses(survey: Survey, responses: Sequence[Mapping]) -> tuple[Survey, DisagreementStats]:
    """Resolve verdicts from reviewer responses.

    Each response is {item_id, reviewer, verdict, comment?}. One vote per
    (item, reviewer); majority decides, ties resolve to disagree. Verdicts
    only move pending -> {agree, disagree}: a response against an item
    reviewed in an earlier batch is a conflict. Stats describe the whole
    survey after the batch, so sequential ingests accumulate.
    """
    by_id = {item.id: item for item in survey.items}
    votes: dict[str, dict[str, str]] = {}
    for response in responses:
        missing = {"item_id", "reviewer", "verdict"} - set(response)
        if missing:
            raise ReviewError(f"response missing fields {sorted(missing)}: {response!r}")
        item_id, reviewer = str(response["item_id"]), str(response["reviewer"])
        verdict = str(response["verdict"])
        if item_id not in by_id:
            raise ReviewError(f"response references unknown item {item_id}")
        if by_id[item_id].verdict != VERDICT_PENDING:
            raise ReviewError(f"item {item_id} already reviewed")
        if verdict not in (VERDICT_AGREE, VERDICT_DISAGREE):
            raise ReviewError(f"verdict must be agree or disagree, got {verdict!r}")
        item_votes = votes.setdefault(item_id, {})
        if reviewer in item_votes:
            raise ReviewError(f"reviewer {reviewer} already voted on {item_id}")
        item_votes[reviewer] = verdict

    resolved: list[SurveyItem] = []
    for item in survey.items:
        item_votes = votes.get(item.id)
        if not item_votes:
            resolved.append(item)
            continue
        agree_count = sum(1 for v in item_votes.values() if v == VERDICT_AGREE)
        disagree_count = len(item_votes) - agree_count
        if agree_count > disagree_count:
            verdict = VERDICT_AGREE
        else:
            verdict = VERDICT_DISAGREE  # ties are conservative: exclude the flow
        resolved.append(replace(item, verdict=verdict))

    agreed = sum(1 for item in resolved if item.verdict == VERDICT_AGREE)
    disagreed = sum(1 for item in resolved if item.verdict == VERDICT_DISAGREE)
    reviewed = agreed + disagreed
    rate = round(100.0 * disagreed / reviewed, 2) if reviewed else 0.0
    coverage = round(100.0 * reviewed / len(survey.items), 2) if survey.items else 0.0
    stats = DisagreementStats(
        total_items=len(survey.items),
        reviewed=reviewed,
        agreed=agreed,
        disagreed=disagreed,
        disagreement_rate=rate,
        coverage=coverage,
    )
    return Survey(items=tuple(resolved)), stats


def apply_verdicts(flows: Sequence[FlowCandidate], survey: Survey) -> list[FlowCandidate]:
    """Push survey verdicts back onto flow statuses (pending leaves proposed)."""
    verdict_of = {item.id: item.verdict for item in survey.items}
    status_map = {
        VERDICT_AGREE: STATUS_ACCEPTED,
        VERDICT_DISAGREE: STATUS_REJECTED,
        VERDICT_PENDING: STATUS_PROPOSED,
    }
    updated: list[FlowCandidate] = []
    for flow in flows:
        key = f"{flow.source.viewpoint_id}->{flow.target.viewpoint_id}"
        verdict = verdict_of.get(key, VERDICT_PENDING)
        updated.append(flow.with_status(status_map[verdict]))
    return updated


def survey_from_payload(payload: Mapping) -> Survey:
    items = tuple(
        SurveyItem(
            id=item["id"],
            source=dict(item["source"]),
            target=dict(item["target"]),
            direction=item["direction"],
            reasoning=item["reasoning"],
            kind=item["kind"],
            verdict=item.get("verdict", VERDICT_PENDING),
        )
        for item in payload["items"]
    )
    return Survey(items=items)


@dataclass(frozen=True)
class ConsistencyReport:
    within_domain_similarity: dict[str, float | None]
    ec_row_means: dict[str, float | None]
    within_domain_flow_fraction: dict[str, float | None]
    top_by_similarity: str | None
    top_by_ec: str | None
    top_by_flows: str | None
    aligned: bool
    statements: tuple[str, ...]

    def to_payload(self) -> dict:
        return {
            "within_domain_similarity": self.within_domain_similarity,
            "ec_row_means": self.ec_row_means,
            "within_domain_flow_fraction": self.within_domain_flow_fraction,
            "top_by_similarity": self.top_by_similarity,
            "top_by_ec": self.top_by_ec,
            "top_by_flows": self.top_by_flows,
            "aligned": self.aligned,
            "statements": list(self.statements),
        }


def _argmax(scores: Mapping[str, float | None]) -> str | None:
    best: str | None = None
    for code in sorted(scores):
        value = scores[code]
        if value is None:
            continue
        if best is None or value > scores[best]:
            best = code
    return best


def consistency_report(
    matrix: SimilarityMatrix,
    ec_matrix: ECMatrix,
    flows: Sequence[FlowCandidate],
    corpus: Corpus,
    viewpoints_by_presentation: Mapping[str, Sequence[Viewpoint]],
) -> ConsistencyReport:
    """Cross-layer comparison: (a) within-domain mean pairwise similarity,
    (b) mean off-diagonal EC per presenter domain, (c) within-domain flow
    fraction, (d) which domain tops each layer and whether (a) and (c) agree.

    All statistics are recomputed from the source layers at call time.
    """
    domain_of: dict[str, str] = {}
    for pres in corpus.presentations:
        for view in viewpoints_by_presentation.get(pres.id, []):
            domain_of[view.id] = pres.domain_code
    unknown = [vid for vid in matrix.ids if vid not in domain_of]
    if unknown:
        raise ReviewError(f"similarity matrix covers unknown viewpoints {unknown}")

    codes = [d.code for d in corpus.domains]

    within_sim: dict[str, float | None] = {}
    for code in codes:
        member_idx = [i for i, vid in enumerate(matrix.ids) if domain_of[vid] == code]
        pairs = [
            float(matrix.values[i, j])
            for a, i in enumerate(member_idx)
            for j in member_idx[a + 1:]
        ]
        within_sim[code] = sum(pairs) / len(pairs) if pairs else None

    ec_means: dict[str, float | None] = {}
    for code in codes:
        row = [
            v for other in codes if other != code
            for v in [ec_matrix.cell(code, other)] if v is not None
        ]
        ec_means[code] = sum(row) / len(row) if row else None

    flow_fraction: dict[str, float | None] = {}
    for code in codes:
        sourced = [f for f in flows if domain_of.get(f.source.viewpoint_id) == code]
        if not sourced:
            flow_fraction[code] = None
            continue
        within = sum(
            1 for f in sourced if domain_of.get(f.target.viewpoint_id) == code
        )
        flow_fraction[code] = within / len(sourced)

    top_sim = _argmax(within_sim)
    top_ec = _argmax(ec_means)
    top_flow = _argmax(flow_fraction)
    aligned = top_sim is not None and top_sim == top_flow
    statements = (
        f"highest within-domain similarity: {top_sim}",
        f"highest mean cross-domain influence: {top_ec}",
        f"highest within-domain flow fraction: {top_flow}",
        "similarity and flow layers agree on the most self-consistent domain"
        if aligned
        else "similarity and flow layers disagree on the most self-consistent domain",
    )
    return ConsistencyReport(
        within_domain_similarity=within_sim,
        ec_row_means=ec_means,
        within_domain_flow_fraction=flow_fraction,
        top_by_similarity=top_sim,
        top_by_ec=top_ec,
        top_by_flows=top_flow,
        aligned=aligned,
        statements=statements,
    )
