"""Language-model provider contract plus a deterministic offline mock.

A provider maps (instruction text, input text) to a structured completion
string. The mock is a pure function of its inputs and seed: it applies a
fixed keyword-rule table for viewpoint labeling, a shared-token Jaccard rule
for flow proposals, and a keyword-overlap rule for domain affinity, so the
whole pipeline can run and be tested with no network access.
"""
from __future__ import annotations

import json
import re
import urllib.request
from dataclasses import dataclass
from typing import Protocol


class ProviderError(RuntimeError):
    """Provider unreachable or returned a transport-level failure (retryable)."""


class ProviderContract(Protocol):
    def complete(self, instruction: str, input_text: str) -> str:
        """Return a structured completion for the given instruction and input."""
        ...


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_WORD = re.compile(r"[a-z0-9]+")

# Label rules: a token votes for a category when it starts with one of the
# category's stems. Stems cover the inflected forms (need/needs, deploy/deploys, ...).
LABEL_STEMS: dict[str, tuple[str, ...]] = {
    "N": ("need", "lack", "insecur"),
    "A": ("approach", "method", "techniqu", "deploy"),
    "B": ("benefit", "improv", "enabl"),
    "C": ("competit", "compar", "exist"),
}
_LABEL_ORDER = ("N", "A", "B", "C")


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def _label_votes(sentence: str) -> dict[str, int]:
    votes = {label: 0 for label in _LABEL_ORDER}
    for token in tokenize(sentence):
        for label, stems in LABEL_STEMS.items():
            if any(token.startswith(stem) for stem in stems):
                votes[label] += 1
    return votes


def mock_extract_completion(transcript: str, max_viewpoints: int = 10) -> dict:
    """Keyword-rule viewpoint extraction over sentences.

    Scores each sentence by its rule-keyword hits, keeps the `max_viewpoints`
    highest-scoring ones (ties by transcript position), labels each with the
    winning category (ties by N, A, B, C order), and uses the first 10 words
    as the summary and the full sentence as the grounding quote.
    """
    scored: list[tuple[int, int, str, str]] = []
    for position, sentence in enumerate(split_sentences(transcript)):
        votes = _label_votes(sentence)
        score = sum(votes.values())
        if score == 0:
            continue
        label = max(_LABEL_ORDER, key=lambda lab: (votes[lab], -_LABEL_ORDER.index(lab)))
        scored.append((score, position, label, sentence))
    scored.sort(key=lambda item: (-item[0], item[1]))
    kept = sorted(scored[:max_viewpoints], key=lambda item: item[1])
    viewpoints = [
        {
            "summary": " ".join(sentence.split()[:10]),
            "nabc": label,
            "quote": sentence,
        }
        for _, _, label, sentence in kept
    ]
    return {"viewpoints": viewpoints}


def summary_jaccard(summary_a: str, summary_b: str) -> float:
    tokens_a, tokens_b = set(tokenize(summary_a)), set(tokenize(summary_b))
    if not tokens_a or not tokens_b:
        return 0.0
    return len(tokens_a & tokens_b) / len(tokens_a | tokens_b)


def mock_flow_completion(presentations: list[dict], min_jaccard: float = 0.5) -> dict:
    """Propose a flow for every forward-in-time viewpoint pair whose summaries
    share at least `min_jaccard` of their tokens; confidence is the Jaccard score."""
    flows = []
    for i, earlier in enumerate(presentations):
        for later in presentations[i + 1:]:
            for src in earlier["viewpoints"]:
                for dst in later["viewpoints"]:
                    score = summary_jaccard(src["summary"], dst["summary"])
                    if score < min_jaccard:
                        continue
                    shared = sorted(set(tokenize(src["summary"])) & set(tokenize(dst["summary"])))
                    flows.append(
                        {
                            "source_id": src["id"],
                            "target_id": dst["id"],
                            "confidence": round(score, 6),
                            "reasoning": (
                                f"later viewpoint restates shared terms: {', '.join(shared)}"
                            ),
                        }
                    )
    return {"flows": flows}


def mock_affinity_completion(summary: str, keywords: list[str]) -> dict:
    """Judge viewpoint-to-domain affinity as the fraction of keyword tokens present in the summary."""
    summary_tokens = set(tokenize(summary))
    keyword_tokens = set()
    for keyword in keywords:
        keyword_tokens.update(tokenize(keyword))
    if not keyword_tokens:
        return {"score": 0.0}
    return {"score": len(summary_tokens & keyword_tokens) / len(keyword_tokens)}


@dataclass(frozen=True)
class MockProvider:
    """Deterministic offline provider; dispatches on the input payload shape."""

    seed: int = 0

    def complete(self, instruction: str, input_text: str) -> str:
        try:
            payload = json.loads(input_text)
        except json.JSONDecodeError:
            payload = {"transcript": input_text}
        if "transcript" in payload:
            result = mock_extract_completion(
                payload["transcript"], payload.get("max_viewpoints", 10)
            )
        elif "presentations" in payload:
            result = mock_flow_completion(
                payload["presentations"], payload.get("min_jaccard", 0.5)
            )
        elif "keywords" in payload:
            result = mock_affinity_completion(payload["summary"], payload["keywords"])
        else:
            raise ProviderError(f"mock provider cannot dispatch input keys {sorted(payload)}")
        return json.dumps(result, sort_keys=True)


@dataclass(frozen=True)
class HttpProvider:
    """Remote chat-completion service speaking a minimal JSON protocol."""

    endpoint: str
    model: str
    api_key: str
    timeout: float = 60.0

    def complete(self, instruction: str, input_text: str) -> str:
        body = json.dumps(
            {"model": self.model, "instruction": instruction, "input": input_text}
        ).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint,
            data=body,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self.api_key}",
            },
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                reply = json.loads(response.read().decode("utf-8"))
        except Exception as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        if "completion" not in reply:
            raise ProviderError("provider response missing 'completion' field")
        return reply["completion"]
