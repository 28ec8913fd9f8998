"""NABC viewpoint extraction and opinion-flow inference through a provider.

Grounded-inference constraints enforced here:
  - every viewpoint must cite a verbatim transcript quote (whitespace-normalized
    match); viewpoints that fail grounding are dropped and logged;
  - every flow is a typed endpoint-to-endpoint link (viewpoint id, presenter,
    NABC label on both ends) pointing forward in presentation order;
  - per source presenter: at most `max_flows_per_presenter` flows and at most
    `max_flows_per_kind` of each kind, truncated deterministically.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from converge.corpus import Corpus, Presentation
from converge.providers import ProviderContract, ProviderError

logger = logging.getLogger(__name__)

NABC_LABELS = ("N", "A", "B", "C")
WITHIN_CATEGORY = "within_category"
CROSS_CATEGORY = "cross_category"

STATUS_PROPOSED = "proposed"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"


class SchemaViolation(ValueError):
    """Provider output failed to parse into the declared schema after retries."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response


@dataclass(frozen=True)
class ExtractionLimits:
    max_viewpoints: int = 10
    max_summary_words: int = 10
    max_flows_per_presenter: int = 20
    max_flows_per_kind: int = 10
    min_jaccard: float = 0.5
    retries: int = 2


@dataclass(frozen=True)
class Viewpoint:
    id: str
    presentation_id: str
    summary: str
    nabc: str
    quote: str
    index: int


@dataclass(frozen=True)
class FlowEndpoint:
    viewpoint_id: str
    presenter: str
    nabc: str


@dataclass(frozen=True)
class FlowCandidate:
    source: FlowEndpoint
    target: FlowEndpoint
    kind: str
    reasoning: str
    confidence: float = 0.0
    status: str = STATUS_PROPOSED

    def with_status(self, status: str) -> "FlowCandidate":
        return replace(self, status=status)


def load_prompt(name: str, **values: object) -> str:
    """Read a prompt asset and fill its {placeholder} slots. Plain replacement,
    not str.format, because the templates contain literal JSON braces."""
    text = resources.files("converge.prompts").joinpath(name).read_text(encoding="utf-8")
    for key, value in values.items():
        text = text.replace("{" + key + "}", str(value))
    return text


def normalize_whitespace(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def verify_grounding(quote: str, transcript: str) -> str | None:
    """Return None when the whitespace-normalized quote occurs verbatim in the
    transcript, else a failure reason. Case-sensitive; total function."""
    if not quote.strip():
        return "quote is empty"
    if normalize_whitespace(quote) in normalize_whitespace(transcript):
        return None
    return "quote not found in transcript"


def _request_structured(
    provider: ProviderContract,
    instruction: str,
    input_text: str,
    retries: int,
) -> tuple[dict, str]:
    """Call the provider, retrying schema/parse failures with a repair re-prompt."""
    raw = ""
    prompt = instruction
    for attempt in range(retries + 1):
        raw = provider.complete(prompt, input_text)
        try:
            parsed = json.loads(raw)
            if isinstance(parsed, dict):
                return parsed, raw
            reason = "completion is not a JSON object"
        except json.JSONDecodeError as exc:
            reason = f"completion is not valid JSON: {exc}"
        if attempt < retries:
            logger.warning("provider output rejected (%s), re-prompting (attempt %d)", reason, attempt + 2)
            prompt = (
                instruction
                + "\n\nYour previous response could not be parsed ("
                + reason
                + "). Respond with valid JSON only."
            )
    raise SchemaViolation(f"provider output invalid after {retries + 1} attempts: {reason}", raw)


def _validate_viewpoint_record(record: object, limits: ExtractionLimits) -> tuple[str, str, str]:
    if not isinstance(record, dict):
        raise SchemaViolation(f"viewpoint record is not an object: {record!r}")
    missing = {"summary", "nabc", "quote"} - set(record)
    if missing:
        raise SchemaViolation(f"viewpoint record missing fields {sorted(missing)}")
    summary, nabc, quote = str(record["summary"]), str(record["nabc"]), str(record["quote"])
    if nabc not in NABC_LABELS:
        raise SchemaViolation(f"nabc label {nabc!r} not one of {NABC_LABELS}")
    if len(summary.split()) > limits.max_summary_words:
        raise SchemaViolation(f"summary exceeds {limits.max_summary_words} words: {summary!r}")
    return summary, nabc, quote


def extract_viewpoints_with_raw(
    presentation: Presentation,
    provider: ProviderContract,
    limits: ExtractionLimits = ExtractionLimits(),
) -> tuple[list[Viewpoint], list[dict]]:
    """Extract up to `limits.max_viewpoints` grounded, NABC-labeled viewpoints.

    Viewpoint ids are `{DOMAIN}-{Pseudonym}-{index}` with a 1-based index in
    emission order. Ungrounded viewpoints are dropped with a warning; schema
    violations surface after the configured retries. Also returns the raw
    provider records so the pre-filter set can be persisted for audit.
    """
    instruction = load_prompt(
        "nabc_extract_v1.txt",
        max_viewpoints=limits.max_viewpoints,
        max_summary_words=limits.max_summary_words,
    )
    input_text = json.dumps(
        {"transcript": presentation.transcript, "max_viewpoints": limits.max_viewpoints}
    )
    parsed, raw = _request_structured(provider, instruction, input_text, limits.retries)
    records = parsed.get("viewpoints")
    if not isinstance(records, list):
        raise SchemaViolation("completion missing 'viewpoints' list", raw)
    if len(records) > limits.max_viewpoints:
        raise SchemaViolation(
            f"provider returned {len(records)} viewpoints, limit is {limits.max_viewpoints}", raw
        )
    viewpoints: list[Viewpoint] = []
    for record in records:
        summary, nabc, quote = _validate_viewpoint_record(record, limits)
        failure = verify_grounding(quote, presentation.transcript)
        if failure is not None:
            logger.warning(
                "presentation %s: dropping ungrounded viewpoint %r (%s)",
                presentation.id, summary, failure,
            )
            continue
        index = len(viewpoints) + 1
        viewpoints.append(
            Viewpoint(
                id=f"{presentation.domain_code}-{presentation.presenter}-{index}",
                presentation_id=presentation.id,
                summary=summary,
                nabc=nabc,
                quote=quote,
                index=index,
            )
        )
    if not viewpoints:
        logger.warning("presentation %s: no extractable viewpoints", presentation.id)
    return viewpoints, [dict(r) for r in records]


def extract_viewpoints(
    presentation: Presentation,
    provider: ProviderContract,
    limits: ExtractionLimits = ExtractionLimits(),
) -> list[Viewpoint]:
    return extract_viewpoints_with_raw(presentation, provider, limits)[0]


def extract_corpus_viewpoints(
    corpus: Corpus,
    provider: ProviderContract,
    limits: ExtractionLimits = ExtractionLimits(),
) -> dict[str, list[Viewpoint]]:
    """Run extraction per presentation; results keyed by presentation id in order."""
    return {
        pres.id: extract_viewpoints(pres, provider, limits)
        for pres in corpus.presentations
    }


def flow_kind(source_nabc: str, target_nabc: str) -> str:
    return WITHIN_CATEGORY if source_nabc == target_nabc else CROSS_CATEGORY


def infer_flows(
    corpus: Corpus,
    viewpoints_by_presentation: dict[str, list[Viewpoint]],
    provider: ProviderContract,
    limits: ExtractionLimits = ExtractionLimits(),
) -> list[FlowCandidate]:
    """Infer candidate opinion flows between earlier and later presentations.

    The provider sees summaries, NABC labels, presenters, and domains only
    (never transcripts). Backward-in-time proposals are rejected and logged.
    Per-presenter caps are enforced by keeping the highest-confidence
    candidates first, ties broken by lexicographic target id.
    """
    presentations = list(corpus.presentations)
    if len(presentations) < 2:
        logger.warning("flow inference needs at least 2 presentations, got %d", len(presentations))
        return []

    instruction = load_prompt(
        "flow_infer_v1.txt",
        max_flows_per_presenter=limits.max_flows_per_presenter,
        max_flows_per_kind=limits.max_flows_per_kind,
    )
    payload = {
        "presentations": [
            {
                "id": pres.id,
                "order_index": pres.order_index,
                "presenter": pres.presenter,
                "domain": pres.domain_code,
                "viewpoints": [
                    {"id": v.id, "summary": v.summary, "nabc": v.nabc}
                    for v in viewpoints_by_presentation.get(pres.id, [])
                ],
            }
            for pres in presentations
        ],
        "min_jaccard": limits.min_jaccard,
    }
    parsed, raw = _request_structured(provider, instruction, json.dumps(payload), limits.retries)
    records = parsed.get("flows")
    if not isinstance(records, list):
        raise SchemaViolation("completion missing 'flows' list", raw)

    by_id: dict[str, tuple[Viewpoint, Presentation]] = {}
    for pres in presentations:
        for view in viewpoints_by_presentation.get(pres.id, []):
            by_id[view.id] = (view, pres)

    candidates: list[FlowCandidate] = []
    seen_pairs: set[tuple[str, str]] = set()
    for record in records:
        if not isinstance(record, dict) or {"source_id", "target_id", "reasoning"} - set(record):
            raise SchemaViolation(f"flow record malformed: {record!r}", raw)
        source_id, target_id = str(record["source_id"]), str(record["target_id"])
        reasoning = str(record["reasoning"]).strip()
        if not reasoning:
            raise SchemaViolation(f"flow {source_id}->{target_id} has empty reasoning", raw)
        if source_id not in by_id or target_id not in by_id:
            logger.warning("dropping flow with unknown endpoint %s->%s", source_id, target_id)
            continue
        src_view, src_pres = by_id[source_id]
        dst_view, dst_pres = by_id[target_id]
        if src_pres.order_index >= dst_pres.order_index:
            logger.error(
                "backward flow rejected: %s (order %d) -> %s (order %d)",
                source_id, src_pres.order_index, target_id, dst_pres.order_index,
            )
            continue
        if (source_id, target_id) in seen_pairs:
            continue
        seen_pairs.add((source_id, target_id))
        candidates.append(
            FlowCandidate(
                source=FlowEndpoint(source_id, src_pres.presenter, src_view.nabc),
                target=FlowEndpoint(target_id, dst_pres.presenter, dst_view.nabc),
                kind=flow_kind(src_view.nabc, dst_view.nabc),
                reasoning=reasoning,
                confidence=float(record.get("confidence", 0.0)),
            )
        )

    capped = _truncate_per_presenter(candidates, limits)
    order = {pres.id: pres.order_index for pres in presentations}
    view_order = {vid: (order[pair[1].id], pair[0].index) for vid, pair in by_id.items()}
    capped.sort(key=lambda f: (*view_order[f.source.viewpoint_id], *view_order[f.target.viewpoint_id]))
    return capped


def viewpoint_to_payload(view: Viewpoint) -> dict:
    return {
        "id": view.id,
        "presentation_id": view.presentation_id,
        "summary": view.summary,
        "nabc": view.nabc,
        "quote": view.quote,
        "index": view.index,
    }


def viewpoint_from_payload(payload: dict) -> Viewpoint:
    return Viewpoint(
        id=payload["id"],
        presentation_id=payload["presentation_id"],
        summary=payload["summary"],
        nabc=payload["nabc"],
        quote=payload["quote"],
        index=int(payload["index"]),
    )


def flow_to_payload(flow: FlowCandidate) -> dict:
    return {
        "source": {
            "viewpoint_id": flow.source.viewpoint_id,
            "presenter": flow.source.presenter,
            "nabc": flow.source.nabc,
        },
        "target": {
            "viewpoint_id": flow.target.viewpoint_id,
            "presenter": flow.target.presenter,
            "nabc": flow.target.nabc,
        },
        "kind": flow.kind,
        "reasoning": flow.reasoning,
        "confidence": flow.confidence,
        "status": flow.status,
    }


def flow_from_payload(payload: dict) -> FlowCandidate:
    return FlowCandidate(
        source=FlowEndpoint(
            payload["source"]["viewpoint_id"],
            payload["source"]["presenter"],
            payload["source"]["nabc"],
        ),
        target=FlowEndpoint(
            payload["target"]["viewpoint_id"],
            payload["target"]["presenter"],
            payload["target"]["nabc"],
        ),
        kind=payload["kind"],
        reasoning=payload["reasoning"],
        confidence=float(payload.get("confidence", 0.0)),
        status=payload.get("status", STATUS_PROPOSED),
    )


def audit_grounding(
    corpus: Corpus, viewpoints_by_presentation: dict[str, list[Viewpoint]]
) -> list[tuple[str, str]]:
    """Re-verify every persisted viewpoint against its transcript; returns
    (viewpoint id, reason) pairs for any failures."""
    transcripts = {pres.id: pres.transcript for pres in corpus.presentations}
    failures: list[tuple[str, str]] = []
    for pres_id, views in viewpoints_by_presentation.items():
        transcript = transcripts.get(pres_id)
        if transcript is None:
            failures.extend((v.id, "unknown presentation") for v in views)
            continue
        for view in views:
            reason = verify_grounding(view.quote, transcript)
            if reason is not None:
                failures.append((view.id, reason))
    return failures


def _truncate_per_presenter(
    candidates: list[FlowCandidate], limits: ExtractionLimits
) -> list[FlowCandidate]:
    kept: list[FlowCandidate] = []
    by_presenter: dict[str, list[FlowCandidate]] = {}
    for cand in candidates:
        by_presenter.setdefault(cand.source.presenter, []).append(cand)
    for presenter, group in by_presenter.items():
        group = sorted(group, key=lambda f: (-f.confidence, f.target.viewpoint_id))
        taken: list[FlowCandidate] = []
        kind_counts = {WITHIN_CATEGORY: 0, CROSS_CATEGORY: 0}
        for cand in group:
            if len(taken) >= limits.max_flows_per_presenter:
                break
            if kind_counts[cand.kind] >= limits.max_flows_per_kind:
                continue
            kind_counts[cand.kind] += 1
            taken.append(cand)
        if len(taken) < len(group):
            logger.info(
                "presenter %s: truncated %d flow candidates to %d",
                presenter, len(group), len(taken),
            )
        kept.extend(taken)
    return kept
