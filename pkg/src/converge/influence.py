"""Cross-domain influence: per-presentation domain graphs, eigenvector
centrality by power iteration, and the aggregated mean-EC matrix.

The domain graph of a presentation is a star from the presenter's domain:
edge weight to domain j counts the presenter's viewpoints whose affinity to
j's keyword bag clears a threshold. Centrality follows AX = dX, keeping the
dominant eigenpair, max-normalized so the presenter's own domain scores 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from converge.corpus import Domain
from converge.extraction import Viewpoint
from converge.providers import ProviderContract
from converge.semantics import EmbeddingBackend, cosine_similarity


class InfluenceError(ValueError):
    pass


def domain_affinity(
    viewpoint: Viewpoint,
    domain: Domain,
    backend: EmbeddingBackend | None = None,
    provider: ProviderContract | None = None,
) -> float:
    """Affinity between a viewpoint and a domain keyword bag.

    Embedding backend: cosine between the summary embedding and the centroid
    of per-keyword embeddings. Provider backend: structured judgment in [0,1].
    """
    if not domain.keywords:
        raise InfluenceError(f"domain {domain.code} has an empty keyword bag")
    if backend is not None:
        summary_vec = backend.embed([viewpoint.summary])[0]
        keyword_vecs = backend.embed(list(domain.keywords))
        centroid = keyword_vecs.mean(axis=0)
        if not centroid.any():
            raise InfluenceError(f"keyword centroid for {domain.code} has zero norm")
        return cosine_similarity(summary_vec, centroid)
    if provider is not None:
        raw = provider.complete(
            "Score how strongly the viewpoint relates to the domain keywords, 0 to 1.",
            json.dumps({"summary": viewpoint.summary, "keywords": list(domain.keywords)}),
        )
        score = float(json.loads(raw)["score"])
        if not 0.0 <= score <= 1.0:
            raise InfluenceError(f"provider affinity {score} outside [0, 1]")
        return score
    raise InfluenceError("either an embedding backend or a provider is required")


@dataclass(frozen=True)
class DomainGraph:
    presentation_id: str
    presenter_domain: str
    codes: tuple[str, ...]
    adjacency: np.ndarray  # symmetric, zero diagonal, non-negative integers

    def __post_init__(self):
        n = len(self.codes)
        if self.adjacency.shape != (n, n):
            raise InfluenceError("adjacency shape does not match domain count")
        if np.any(self.adjacency < 0):
            raise InfluenceError("adjacency weights must be non-negative")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise InfluenceError("adjacency must be symmetric")
        if np.any(np.diag(self.adjacency) != 0):
            raise InfluenceError("adjacency diagonal must be zero")
        if self.presenter_domain not in self.codes:
            raise InfluenceError(f"presenter domain {self.presenter_domain} not registered")

    @property
    def degenerate(self) -> bool:
        return not np.any(self.adjacency > 0)


def _observed_threshold(affinities: Sequence[float], percentile: float = 75.0) -> float:
    """Nearest-rank percentile of the observed affinity multiset."""
    ordered = sorted(affinities)
    rank = math.ceil(Fraction(str(percentile)) * len(ordered) / 100)
    return ordered[rank - 1]


def build_domain_graph(
    viewpoints: Sequence[Viewpoint],
    presentation_id: str,
    presenter_domain: str,
    domains: Sequence[Domain],
    backend: EmbeddingBackend | None = None,
    provider: ProviderContract | None = None,
    theta_dom: float | None = None,
) -> DomainGraph:
    """Star graph from the presenter's domain; weight to domain j counts the
    viewpoints with affinity(v, j) >= theta_dom.

    When theta_dom is None it defaults to 0.5 under the provider backend and
    to the 75th percentile of this presentation's observed affinities under
    the embedding backend.
    """
    if not viewpoints:
        raise InfluenceError(f"presentation {presentation_id} has no viewpoints")
    codes = tuple(d.code for d in domains)
    others = [d for d in domains if d.code != presenter_domain]
    scores = {
        d.code: [domain_affinity(v, d, backend=backend, provider=provider) for v in viewpoints]
        for d in others
    }
    if theta_dom is None:
        if backend is not None:
            pooled = [s for per_domain in scores.values() for s in per_domain]
            theta_dom = _observed_threshold(pooled) if pooled else 0.0
        else:
            theta_dom = 0.5
    index = {code: i for i, code in enumerate(codes)}
    adjacency = np.zeros((len(codes), len(codes)), dtype=int)
    k = index[presenter_domain]
    for d in others:
        count = sum(1 for s in scores[d.code] if s >= theta_dom)
        adjacency[k, index[d.code]] = count
        adjacency[index[d.code], k] = count
    return DomainGraph(
        presentation_id=presentation_id,
        presenter_domain=presenter_domain,
        codes=codes,
        adjacency=adjacency,
    )


@dataclass(frozen=True)
class CentralityVector:
    presenter_domain: str
    presentation_id: str
    values: dict[str, float]  # domain code -> score, max component 1
    dominant_eigenvalue: float


def _component_of(adjacency: np.ndarray, start: int) -> set[int]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for neighbor in np.flatnonzero(adjacency[node] > 0):
            if int(neighbor) not in seen:
                seen.add(int(neighbor))
                frontier.append(int(neighbor))
    return seen


def power_iteration(
    adjacency: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000
) -> tuple[np.ndarray, float, int]:
    """Dominant eigenpair of a symmetric non-negative matrix.

    Iterates on A + sigma*I (same eigenvectors, spectrum shifted positive) so
    bipartite graphs, whose extreme eigenvalues come in +/- pairs, still
    converge. Returns (unit eigenvector, eigenvalue of A, iterations).
    """
    adjacency = np.asarray(adjacency, dtype=float)
    if not np.any(adjacency > 0):
        raise InfluenceError("all-zero adjacency has no dominant eigenpair")
    n = adjacency.shape[0]
    sigma = float(adjacency.max())
    shifted = adjacency + sigma * np.eye(n)
    x = np.full(n, 1.0 / math.sqrt(n))
    for iteration in range(1, max_iter + 1):
        nxt = shifted @ x
        nxt /= np.linalg.norm(nxt)
        delta = float(np.max(np.abs(nxt - x)))
        x = nxt
        if delta < tol:
            eigenvalue = float(x @ (adjacency @ x))  # Rayleigh quotient on A itself
            return x, eigenvalue, iteration
    residual = float(np.max(np.abs(shifted @ x / np.linalg.norm(shifted @ x) - x)))
    raise InfluenceError(
        f"power iteration did not converge in {max_iter} steps (residual {residual:.3e})"
    )


def eigenvector_centrality(
    graph: DomainGraph, tol: float = 1e-10, max_iter: int = 10_000
) -> CentralityVector:
    """EC scores over all registered domains, max-normalized to 1; domains
    disconnected from the presenter's component score exactly 0."""
    if graph.degenerate:
        raise InfluenceError(
            f"presentation {graph.presentation_id}: all-zero adjacency (degenerate graph)"
        )
    component = _component_of(graph.adjacency, graph.codes.index(graph.presenter_domain))
    idx = sorted(component)
    sub = graph.adjacency[np.ix_(idx, idx)].astype(float)
    vector, eigenvalue, _ = power_iteration(sub, tol=tol, max_iter=max_iter)
    vector = np.abs(vector)  # Perron vector is non-negative; scrub float signs
    vector /= vector.max()
    values = {code: 0.0 for code in graph.codes}
    for local, original in enumerate(idx):
        values[graph.codes[original]] = float(vector[local])
    return CentralityVector(
        presenter_domain=graph.presenter_domain,
        presentation_id=graph.presentation_id,
        values=values,
        dominant_eigenvalue=eigenvalue,
    )


@dataclass(frozen=True)
class ECMatrix:
    codes: tuple[str, ...]
    cells: dict[tuple[str, str], float]  # (presenter domain, domain) -> mean EC
    counts: dict[str, int]  # presenter domain -> contributing presentations

    def cell(self, row: str, col: str) -> float | None:
        if row == col:
            return 1.0
        return self.cells.get((row, col))

    def to_payload(self) -> dict:
        return {
            "rows": list(self.codes),
            "cols": list(self.codes),
            "cells": [
                [self.cell(row, col) for col in self.codes] for row in self.codes
            ],
            "counts": [
                [self.counts.get(row, 0) for _ in self.codes] for row in self.codes
            ],
        }


def build_ec_matrix(
    centralities: Sequence[CentralityVector], codes: Sequence[str]
) -> ECMatrix:
    """cell(k, i) = mean EC of domain i over presentations whose presenter is
    from domain k; diagonal fixed at 1; rows without presentations stay blank."""
    if not centralities:
        raise InfluenceError("EC matrix needs at least one centrality vector")
    codes = tuple(codes)
    sums: dict[tuple[str, str], float] = {}
    counts: dict[str, int] = {}
    for vector in centralities:
        counts[vector.presenter_domain] = counts.get(vector.presenter_domain, 0) + 1
        for code in codes:
            key = (vector.presenter_domain, code)
            sums[key] = sums.get(key, 0.0) + vector.values.get(code, 0.0)
    cells = {
        (row, col): value / counts[row]
        for (row, col), value in sums.items()
        if row != col
    }
    for value in cells.values():
        if not 0.0 <= value <= 1.0 + 1e-12:
            raise InfluenceError(f"EC cell {value} outside [0, 1]")
    return ECMatrix(codes=codes, cells=cells, counts=counts)


def render_ec_table(matrix: ECMatrix) -> str:
    """Plain-text table; blank cells mark domains that never presented."""
    width = max(6, max(len(c) for c in matrix.codes) + 1)
    header = " " * width + "".join(code.rjust(width) for code in matrix.codes)
    lines = [header]
    for row in matrix.codes:
        rendered = [row.ljust(width)]
        for col in matrix.codes:
            value = matrix.cell(row, col)
            if row != col and matrix.counts.get(row, 0) == 0:
                rendered.append("-".rjust(width))
            else:
                rendered.append(f"{value:.3f}".rjust(width))
        lines.append("".join(rendered))
    return "\n".join(lines) + "\n"


def ec_matrix_from_payload(payload: Mapping) -> ECMatrix:
    codes = tuple(payload["rows"])
    cells: dict[tuple[str, str], float] = {}
    counts: dict[str, int] = {}
    for i, row in enumerate(codes):
        row_count = payload["counts"][i][0] if payload["counts"][i] else 0
        if row_count:
            counts[row] = row_count
        for j, col in enumerate(codes):
            value = payload["cells"][i][j]
            if row != col and value is not None:
                cells[(row, col)] = float(value)
    return ECMatrix(codes=codes, cells=cells, counts=counts)
