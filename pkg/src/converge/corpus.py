"""Corpus data model: research domains, ordered presentations, pseudonymization.

A corpus document is a single UTF-8 JSON file with top-level `domains` and
`presentations` arrays. Corpus values are immutable after load and safe to
share read-only across workers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from converge.jsonio import canonical_bytes, fingerprint, read_json, write_canonical

_CODE_RE = re.compile(r"^[A-Z]{2,4}$")


class CorpusError(ValueError):
    """Invalid corpus document or invariant violation."""


@dataclass(frozen=True)
class Domain:
    code: str
    name: str
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not _CODE_RE.match(self.code):
            raise CorpusError(f"domain code {self.code!r} must match [A-Z]{{2,4}}")
        if not self.keywords:
            raise CorpusError(f"domain {self.code}: keyword bag must be non-empty")


@dataclass(frozen=True)
class Presentation:
    id: str
    order_index: int
    presenter: str
    domain_code: str
    transcript: str

    def __post_init__(self) -> None:
        if self.order_index < 1:
            raise CorpusError(f"presentation {self.id}: order_index must be >= 1")
        if not self.transcript:
            raise CorpusError(f"presentation {self.id}: transcript is empty")


@dataclass(frozen=True)
class Corpus:
    domains: tuple[Domain, ...]
    presentations: tuple[Presentation, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        codes = [d.code for d in self.domains]
        dupes = sorted({c for c in codes if codes.count(c) > 1})
        if dupes:
            raise CorpusError(f"duplicate domain codes: {', '.join(dupes)}")
        indices = [p.order_index for p in self.presentations]
        for idx in sorted({i for i in indices if indices.count(i) > 1}):
            offenders = [p.id for p in self.presentations if p.order_index == idx]
            raise CorpusError(f"duplicate order_index {idx} in presentations {', '.join(offenders)}")
        if indices and sorted(indices) != list(range(1, len(indices) + 1)):
            raise CorpusError(f"order_index values must form a contiguous 1..{len(indices)} sequence, got {sorted(indices)}")
        known = set(codes)
        for pres in self.presentations:
            if pres.domain_code not in known:
                raise CorpusError(f"presentation {pres.id}: unknown domain_code {pres.domain_code!r}")
        object.__setattr__(self, "presentations", tuple(sorted(self.presentations, key=lambda p: p.order_index)))

    def domain(self, code: str) -> Domain:
        for dom in self.domains:
            if dom.code == code:
                return dom
        raise CorpusError(f"unknown domain_code {code!r}")

    def presenters(self) -> tuple[str, ...]:
        seen: list[str] = []
        for pres in self.presentations:
            if pres.presenter not in seen:
                seen.append(pres.presenter)
        return tuple(seen)

    def to_payload(self) -> dict:
        return {
            "domains": [
                {"code": d.code, "name": d.name, "keywords": list(d.keywords)} for d in self.domains
            ],
            "presentations": [
                {
                    "id": p.id,
                    "order_index": p.order_index,
                    "presenter": p.presenter,
                    "domain_code": p.domain_code,
                    "transcript": p.transcript,
                }
                for p in self.presentations
            ],
            "metadata": dict(self.metadata),
        }

    def fingerprint(self) -> str:
        return fingerprint(self.to_payload())


def corpus_from_payload(payload: dict) -> Corpus:
    if not isinstance(payload, dict):
        raise CorpusError("corpus document must be a JSON object")
    try:
        domains = tuple(
            Domain(code=d["code"], name=d["name"], keywords=tuple(d["keywords"]))
            for d in payload.get("domains", [])
        )
        presentations = tuple(
            Presentation(
                id=p["id"],
                order_index=int(p["order_index"]),
                presenter=p["presenter"],
                domain_code=p["domain_code"],
                transcript=p["transcript"],
            )
            for p in payload.get("presentations", [])
        )
    except KeyError as exc:
        raise CorpusError(f"corpus document record is missing field {exc}") from None
    metadata = {str(k): str(v) for k, v in payload.get("metadata", {}).items()}
    return Corpus(domains=domains, presentations=presentations, metadata=metadata)


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus document; raises CorpusError with the offending record id."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    try:
        payload = read_json(path)
    except ValueError as exc:
        raise CorpusError(f"malformed corpus document {path}: {exc}") from None
    return corpus_from_payload(payload)


def fixture_path(name: str) -> Path:
    """Filesystem path of a corpus document bundled with the package."""
    from importlib import resources

    if not name.endswith(".json"):
        name = f"{name}.json"
    candidate = resources.files("converge").joinpath(f"fixtures/{name}")
    path = Path(str(candidate))
    if not path.exists():
        raise CorpusError(f"no bundled fixture named {name!r}")
    return path


def load_fixture(name: str) -> Corpus:
    return load_corpus(fixture_path(name))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    write_canonical(Path(path), corpus.to_payload())


def corpus_bytes(corpus: Corpus) -> bytes:
    return canonical_bytes(corpus.to_payload())


def pseudonymize(corpus: Corpus, mapping: dict[str, str]) -> Corpus:
    """Replace presenter names using `mapping`; transcripts are left untouched.

    Idempotent under a fixed mapping: presenters that already carry one of the
    mapping's pseudonyms pass through unchanged. The mapping itself is the
    caller's to persist; it never enters the returned corpus.
    """
    pseudonyms = list(mapping.values())
    collisions = sorted({p for p in pseudonyms if pseudonyms.count(p) > 1})
    if collisions:
        raise CorpusError(f"pseudonym collision: {', '.join(collisions)}")
    known_pseudonyms = set(pseudonyms)
    unmapped = sorted(
        {p.presenter for p in corpus.presentations}
        - set(mapping)
        - known_pseudonyms
    )
    if unmapped:
        raise CorpusError(f"unmapped presenters: {', '.join(unmapped)}")
    renamed = tuple(
        Presentation(
            id=p.id,
            order_index=p.order_index,
            presenter=mapping.get(p.presenter, p.presenter),
            domain_code=p.domain_code,
            transcript=p.transcript,
        )
        for p in corpus.presentations
    )
    return Corpus(domains=corpus.domains, presentations=renamed, metadata=dict(corpus.metadata))
