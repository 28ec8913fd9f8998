"""Viewpoint embeddings, cosine similarity, and percentile-threshold graphs.

The offline embedding backend is a seeded hash-based bag-of-words projection:
each token lands in a bucket of a fixed-dimension vector with a ±1 sign, both
derived from a keyed digest. Shared tokens therefore always raise cosine
similarity, which is the property the downstream graphs rely on.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Protocol, Sequence

import numpy as np

from converge.providers import tokenize

MODE_ABOVE = "above_threshold"
MODE_BELOW = "below_threshold"
MODES = (MODE_ABOVE, MODE_BELOW)


class SemanticsError(ValueError):
    pass


class EmbeddingBackend(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        ...


@dataclass(frozen=True)
class MockEmbedding:
    """Deterministic feature-hashing embedder (pure function of text and seed)."""

    dimension: int = 64
    seed: int = 0

    def _token_slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "big") % self.dimension
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return bucket, sign

    def embed_one(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dimension, dtype=float)
        for token in tokenize(text):
            bucket, sign = self._token_slot(token)
            vector[bucket] += sign
        if not vector.any():
            # no tokens (or full cancellation): fall back to a fixed unit
            # direction so the non-zero-norm invariant holds
            vector[0] = 1.0
        return vector

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed_one(text) for text in texts])


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise SemanticsError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a, norm_b = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise SemanticsError("cosine similarity undefined for zero-norm vector")
    return float(np.dot(a, b) / (norm_a * norm_b))


@dataclass(frozen=True)
class SimilarityMatrix:
    ids: tuple[str, ...]
    values: np.ndarray  # symmetric, diagonal 1, entries in [-1, 1]

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise SemanticsError(f"matrix shape {self.values.shape} does not match {n} ids")
        if n and not np.allclose(self.values, self.values.T, atol=1e-12):
            raise SemanticsError("similarity matrix is not symmetric")
        if n and not np.allclose(np.diag(self.values), 1.0, atol=1e-9):
            raise SemanticsError("similarity matrix diagonal deviates from 1")
        if n and (self.values.min() < -1.0 - 1e-9 or self.values.max() > 1.0 + 1e-9):
            raise SemanticsError("similarity values outside [-1, 1]")

    def pair_values(self) -> list[float]:
        """Off-diagonal upper-triangle values, row-major."""
        n = len(self.ids)
        return [float(self.values[i, j]) for i in range(n) for j in range(i + 1, n)]

    def to_payload(self) -> dict:
        return {
            "ids": list(self.ids),
            "values": [[float(v) for v in row] for row in self.values],
        }


def matrix_from_payload(payload: Mapping) -> SimilarityMatrix:
    return SimilarityMatrix(
        ids=tuple(payload["ids"]),
        values=np.array(payload["values"], dtype=float),
    )


def similarity_matrix(ids: Sequence[str], vectors: np.ndarray) -> SimilarityMatrix:
    """Pairwise cosine similarity; each cell is independent of evaluation order."""
    vectors = np.asarray(vectors, dtype=float)
    if len(ids) != vectors.shape[0]:
        raise SemanticsError("one vector required per id")
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        zero = [ids[i] for i in np.flatnonzero(norms == 0.0)]
        raise SemanticsError(f"zero-norm vectors for ids {zero}")
    unit = vectors / norms[:, None]
    values = np.clip(unit @ unit.T, -1.0, 1.0)
    np.fill_diagonal(values, 1.0)
    values = (values + values.T) / 2.0
    return SimilarityMatrix(ids=tuple(ids), values=values)


def embed_summaries(
    viewpoints: Sequence, backend: EmbeddingBackend, include_quote: bool = False
) -> SimilarityMatrix:
    """Embed viewpoint summaries (optionally summary + quote) into a similarity matrix."""
    if not viewpoints:
        raise SemanticsError("no viewpoints to embed")
    texts = [
        f"{v.summary} {v.quote}" if include_quote else v.summary for v in viewpoints
    ]
    return similarity_matrix([v.id for v in viewpoints], backend.embed(texts))


def percentile_threshold(matrix: SimilarityMatrix, p: float) -> float:
    """Nearest-rank percentile of the off-diagonal upper-triangle value multiset."""
    if not 0 < p < 100:
        raise SemanticsError(f"percentile must be in (0, 100), got {p}")
    if len(matrix.ids) < 2:
        raise SemanticsError("percentile threshold needs at least 2 viewpoints")
    values = sorted(matrix.pair_values())
    rank = math.ceil(Fraction(str(p)) * len(values) / 100)  # 1-based order statistic
    return values[rank - 1]


@dataclass(frozen=True)
class GraphNode:
    id: str
    domain: str
    nabc: str
    degree: int


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    weight: float


@dataclass(frozen=True)
class ViewGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    mode: str
    threshold: float
    percentile: float | None = None

    def degree_of(self, node_id: str) -> int:
        for node in self.nodes:
            if node.id == node_id:
                return node.degree
        raise SemanticsError(f"unknown node {node_id}")

    def to_payload(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "domain": n.domain, "nabc": n.nabc, "degree": n.degree}
                for n in self.nodes
            ],
            "edges": [
                {"source": e.source, "target": e.target, "weight": e.weight}
                for e in self.edges
            ],
            "meta": {
                "mode": self.mode,
                "threshold": self.threshold,
                "percentile": self.percentile,
            },
        }


def build_view_graph(
    matrix: SimilarityMatrix,
    attributes: Mapping[str, tuple[str, str]],  # id -> (domain_code, nabc)
    threshold: float,
    mode: str,
    percentile: float | None = None,
) -> ViewGraph:
    """Filter pairs by threshold. Pairs exactly at the threshold are included
    in both modes (>= above, <= below); isolated nodes are retained."""
    if mode not in MODES:
        raise SemanticsError(f"mode must be one of {MODES}, got {mode!r}")
    missing = [vid for vid in matrix.ids if vid not in attributes]
    if missing:
        raise SemanticsError(f"missing node attributes for {missing}")
    n = len(matrix.ids)
    degrees = {vid: 0 for vid in matrix.ids}
    edges: list[GraphEdge] = []
    for i in range(n):
        for j in range(i + 1, n):
            weight = float(matrix.values[i, j])
            keep = weight >= threshold if mode == MODE_ABOVE else weight <= threshold
            if not keep:
                continue
            edges.append(GraphEdge(matrix.ids[i], matrix.ids[j], weight))
            degrees[matrix.ids[i]] += 1
            degrees[matrix.ids[j]] += 1
    nodes = tuple(
        GraphNode(vid, attributes[vid][0], attributes[vid][1], degrees[vid])
        for vid in matrix.ids
    )
    return ViewGraph(
        nodes=nodes, edges=tuple(edges), mode=mode,
        threshold=float(threshold), percentile=percentile,
    )


def graph_from_payload(payload: Mapping) -> ViewGraph:
    nodes = tuple(
        GraphNode(n["id"], n["domain"], n["nabc"], n["degree"]) for n in payload["nodes"]
    )
    edges = tuple(
        GraphEdge(e["source"], e["target"], float(e["weight"])) for e in payload["edges"]
    )
    meta = payload.get("meta", {})
    return ViewGraph(
        nodes=nodes, edges=edges, mode=meta.get("mode", MODE_ABOVE),
        threshold=float(meta.get("threshold", 0.0)), percentile=meta.get("percentile"),
    )
