"""Pipeline orchestration: stage functions over a file-backed artifact bundle.

A bundle directory holds the normalized corpus, the validated configuration,
and every derived artifact as canonical JSON, so two runs with identical
inputs and seed produce byte-identical trees. The manifest fingerprints each
artifact; no timestamps are written anywhere.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from converge import corpus as corpus_mod
from converge.corpus import Corpus, CorpusError, load_corpus
from converge.extraction import (
    ExtractionLimits,
    Viewpoint,
    extract_viewpoints_with_raw,
    flow_from_payload,
    flow_to_payload,
    infer_flows,
    viewpoint_from_payload,
    viewpoint_to_payload,
)
from converge.influence import (
    build_domain_graph,
    build_ec_matrix,
    ec_matrix_from_payload,
    eigenvector_centrality,
    render_ec_table,
)
from converge.jsonio import fingerprint, read_json, sha256_hex, write_canonical
from converge.layout3d import LayoutParams, run_layout
from converge.providers import HttpProvider, MockProvider, ProviderContract
from converge.review import (
    apply_verdicts,
    consistency_report,
    generate_survey,
    ingest_responses,
    survey_from_payload,
)
from converge.semantics import (
    MODE_ABOVE,
    MODE_BELOW,
    MockEmbedding,
    build_view_graph,
    embed_summaries,
    graph_from_payload,
    matrix_from_payload,
    percentile_threshold,
)
from converge.temporal import (
    SELECTORS,
    build_cumulative_graphs,
    flow_map_payload,
    ratio_series,
    select_flows,
    trend_report,
)

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "CONVERGE_PROVIDER_ENDPOINT"
ENV_MODEL = "CONVERGE_PROVIDER_MODEL"
ENV_KEY = "CONVERGE_PROVIDER_KEY"


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    provider: str = "mock"  # mock | http
    affinity_backend: str = "embedding"  # embedding | provider
    embedding_dimension: int = 64
    include_quote: bool = False
    percentile: float = 90.0
    theta_dom: float | None = None
    flow_selector: str = "all"
    seed: int = 42
    limits: ExtractionLimits = ExtractionLimits()
    layout: LayoutParams = field(default_factory=LayoutParams)

    def __post_init__(self):
        if self.provider not in ("mock", "http"):
            raise PipelineError(f"provider must be mock or http, got {self.provider!r}")
        if self.affinity_backend not in ("embedding", "provider"):
            raise PipelineError(
                f"affinity backend must be embedding or provider, got {self.affinity_backend!r}"
            )
        if not 0 < self.percentile < 100:
            raise PipelineError(f"percentile must be in (0, 100), got {self.percentile}")
        if self.flow_selector not in SELECTORS:
            raise PipelineError(f"flow selector must be one of {SELECTORS}")
        if self.embedding_dimension <= 0:
            raise PipelineError("embedding dimension must be positive")

    @classmethod
    def make(cls, seed: int = 42, **overrides) -> "PipelineConfig":
        """Build a config whose layout seed follows the pipeline seed unless
        a layout override says otherwise."""
        layout = overrides.pop("layout", LayoutParams(seed=seed))
        return cls(seed=seed, layout=layout, **overrides)

    def to_payload(self) -> dict:
        return {
            "provider": self.provider,
            "affinity_backend": self.affinity_backend,
            "embedding_dimension": self.embedding_dimension,
            "include_quote": self.include_quote,
            "percentile": self.percentile,
            "theta_dom": self.theta_dom,
            "flow_selector": self.flow_selector,
            "seed": self.seed,
            "limits": {
                "max_viewpoints": self.limits.max_viewpoints,
                "max_summary_words": self.limits.max_summary_words,
                "max_flows_per_presenter": self.limits.max_flows_per_presenter,
                "max_flows_per_kind": self.limits.max_flows_per_kind,
                "min_jaccard": self.limits.min_jaccard,
                "retries": self.limits.retries,
            },
            "layout": self.layout.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "PipelineConfig":
        limits = ExtractionLimits(**payload.get("limits", {}))
        layout = LayoutParams(**payload.get("layout", {}))
        known = {
            "provider", "affinity_backend", "embedding_dimension", "include_quote",
            "percentile", "theta_dom", "flow_selector", "seed",
        }
        fields = {k: v for k, v in payload.items() if k in known}
        return cls(limits=limits, layout=layout, **fields)


def resolve_provider(config: PipelineConfig) -> ProviderContract:
    if config.provider == "mock":
        return MockProvider(seed=config.seed)
    endpoint = os.environ.get(ENV_ENDPOINT, "")
    model = os.environ.get(ENV_MODEL, "")
    key = os.environ.get(ENV_KEY, "")
    missing = [
        name for name, value in
        [(ENV_ENDPOINT, endpoint), (ENV_MODEL, model), (ENV_KEY, key)]
        if not value
    ]
    if missing:
        raise PipelineError(f"provider=http requires environment variables {missing}")
    return HttpProvider(endpoint=endpoint, model=model, api_key=key)


def resolve_embedding(config: PipelineConfig) -> MockEmbedding:
    return MockEmbedding(dimension=config.embedding_dimension, seed=config.seed)


# ---------------------------------------------------------------- bundle I/O

def artifact_path(bundle: Path, name: str) -> Path:
    return Path(bundle) / name


def load_config(bundle: Path) -> PipelineConfig:
    payload = read_json(artifact_path(bundle, "config.json"))
    return PipelineConfig.from_payload(payload["config"])


def load_bundle_corpus(bundle: Path) -> Corpus:
    return load_corpus(artifact_path(bundle, "corpus.json"))


def bundle_meta(config: PipelineConfig, corpus: Corpus) -> dict:
    return {"config": config.to_payload(), "corpus_fingerprint": corpus.fingerprint()}


def check_meta(payload: dict, corpus: Corpus, artifact: str) -> None:
    meta = payload.get("meta", {})
    expected = corpus.fingerprint()
    found = meta.get("corpus_fingerprint")
    if found != expected:
        raise PipelineError(
            f"{artifact} was built for corpus {found}, bundle corpus is {expected}"
        )


def load_viewpoints(bundle: Path, corpus: Corpus) -> dict[str, list[Viewpoint]]:
    payload = read_json(artifact_path(bundle, "viewpoints.json"))
    check_meta(payload, corpus, "viewpoints.json")
    return {
        pres_id: [viewpoint_from_payload(v) for v in views]
        for pres_id, views in payload["presentations"].items()
    }


def load_flows(bundle: Path, corpus: Corpus) -> list:
    payload = read_json(artifact_path(bundle, "flows.json"))
    check_meta(payload, corpus, "flows.json")
    return [flow_from_payload(f) for f in payload["flows"]]


# ------------------------------------------------------------------- stages

def stage_ingest(
    corpus_path: Path,
    bundle: Path,
    config: PipelineConfig,
    mapping_path: Path | None = None,
) -> Corpus:
    corpus = load_corpus(corpus_path)
    if mapping_path is not None:
        mapping = read_json(mapping_path)
        corpus = corpus_mod.pseudonymize(corpus, mapping)
        write_canonical(artifact_path(bundle, "pseudonyms.json"), mapping)
    bundle = Path(bundle)
    bundle.mkdir(parents=True, exist_ok=True)
    corpus_mod.save_corpus(corpus, artifact_path(bundle, "corpus.json"))
    write_canonical(
        artifact_path(bundle, "config.json"),
        {"config": config.to_payload(), "corpus_fingerprint": corpus.fingerprint()},
    )
    return corpus


def stage_extract(bundle: Path) -> dict[str, list[Viewpoint]]:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    provider = resolve_provider(config)
    viewpoints: dict[str, list[Viewpoint]] = {}
    raw: dict[str, list[dict]] = {}
    # viewpoints.json keeps only grounded survivors; the raw file keeps
    # whatever the provider emitted, for audit
    for pres in corpus.presentations:
        viewpoints[pres.id], raw[pres.id] = extract_viewpoints_with_raw(
            pres, provider, config.limits
        )
    meta = bundle_meta(config, corpus)
    write_canonical(
        artifact_path(bundle, "viewpoints_raw.json"),
        {"presentations": raw, "meta": meta},
    )
    write_canonical(
        artifact_path(bundle, "viewpoints.json"),
        {
            "presentations": {
                pres.id: [viewpoint_to_payload(v) for v in viewpoints[pres.id]]
                for pres in corpus.presentations
            },
            "meta": meta,
        },
    )
    return viewpoints


def stage_flows(bundle: Path) -> list:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    provider = resolve_provider(config)
    flows = infer_flows(corpus, viewpoints, provider, config.limits)
    write_canonical(
        artifact_path(bundle, "flows.json"),
        {"flows": [flow_to_payload(f) for f in flows], "meta": bundle_meta(config, corpus)},
    )
    return flows


def stage_similarity(bundle: Path):
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    ordered = [v for pres in corpus.presentations for v in viewpoints[pres.id]]
    matrix = embed_summaries(ordered, resolve_embedding(config), config.include_quote)
    payload = matrix.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    write_canonical(artifact_path(bundle, "similarity.json"), payload)
    return matrix


def node_attributes(
    corpus: Corpus, viewpoints: dict[str, list[Viewpoint]]
) -> dict[str, tuple[str, str]]:
    attrs: dict[str, tuple[str, str]] = {}
    for pres in corpus.presentations:
        for view in viewpoints.get(pres.id, []):
            attrs[view.id] = (pres.domain_code, view.nabc)
    return attrs


def build_graph_payload(bundle: Path, percentile: float, mode: str) -> dict:
    """Shared by the CLI verb and the HTTP endpoint so both emit the same bytes."""
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    sim_payload = read_json(artifact_path(bundle, "similarity.json"))
    check_meta(sim_payload, corpus, "similarity.json")
    matrix = matrix_from_payload(sim_payload)
    threshold = percentile_threshold(matrix, percentile)
    graph = build_view_graph(
        matrix, node_attributes(corpus, viewpoints), threshold, mode, percentile
    )
    payload = graph.to_payload()
    payload["meta"].update(bundle_meta(config, corpus))
    return payload


def stage_graphs(bundle: Path) -> None:
    config = load_config(bundle)
    for mode, name in ((MODE_ABOVE, "graph_above.json"), (MODE_BELOW, "graph_below.json")):
        payload = build_graph_payload(bundle, config.percentile, mode)
        write_canonical(artifact_path(bundle, name), payload)


def build_layout_payload(bundle: Path, seed: int | None = None) -> dict:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    graph_payload = read_json(artifact_path(bundle, "graph_above.json"))
    check_meta(graph_payload, corpus, "graph_above.json")
    graph = graph_from_payload(graph_payload)
    params = config.layout if seed is None else replace(config.layout, seed=seed)
    layout = run_layout(graph, params)
    payload = layout.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    return payload


def stage_layout(bundle: Path, seed: int | None = None) -> None:
    write_canonical(
        artifact_path(bundle, "layout.json"), build_layout_payload(bundle, seed)
    )


def stage_influence(bundle: Path, theta_dom: float | None = None) -> None:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    backend = resolve_embedding(config) if config.affinity_backend == "embedding" else None
    provider = resolve_provider(config) if config.affinity_backend == "provider" else None
    if theta_dom is None:
        theta_dom = config.theta_dom
    centralities = []
    for pres in corpus.presentations:
        views = viewpoints.get(pres.id, [])
        if not views:
            logger.warning("presentation %s has no viewpoints; skipping influence", pres.id)
            continue
        graph = build_domain_graph(
            views, pres.id, pres.domain_code, corpus.domains,
            backend=backend, provider=provider, theta_dom=theta_dom,
        )
        if graph.degenerate:
            logger.warning("presentation %s yields a degenerate domain graph", pres.id)
            continue
        centralities.append(eigenvector_centrality(graph))
    if not centralities:
        raise PipelineError("influence: no presentation produced a usable domain graph")
    codes = [d.code for d in corpus.domains]
    matrix = build_ec_matrix(centralities, codes)
    payload = matrix.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    payload["vectors"] = [
        {
            "presentation_id": c.presentation_id,
            "presenter_domain": c.presenter_domain,
            "values": c.values,
            "dominant_eigenvalue": c.dominant_eigenvalue,
        }
        for c in centralities
    ]
    write_canonical(artifact_path(bundle, "ec_matrix.json"), payload)
    artifact_path(bundle, "ec_matrix.txt").write_text(
        render_ec_table(matrix), encoding="utf-8"
    )


def build_flowmap_payload(bundle: Path, selector: str | None = None) -> dict:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    flows = select_flows(load_flows(bundle, corpus), selector or config.flow_selector)
    payload = flow_map_payload(corpus, viewpoints, flows)
    payload["meta"] = bundle_meta(config, corpus)
    payload["meta"]["selector"] = selector or config.flow_selector
    return payload


def build_ratio_payload(bundle: Path, selector: str | None = None) -> dict:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    flows = select_flows(load_flows(bundle, corpus), selector or config.flow_selector)
    meta = bundle_meta(config, corpus)
    meta["selector"] = selector or config.flow_selector
    if len(corpus.presentations) < 2:
        logger.warning("temporal analysis needs at least 2 presentations; emitting empty series")
        return {"entries": [], "trend": None, "meta": meta}
    graphs = build_cumulative_graphs(corpus, viewpoints, flows)
    first = corpus.presentations[0]
    series = ratio_series(graphs, initial_nodes=len(viewpoints.get(first.id, [])))
    by_order = {pres.order_index: pres.id for pres in corpus.presentations}
    trend = trend_report(series, by_order) if len(series.entries) >= 2 else None
    payload = series.to_payload()
    payload["trend"] = trend.to_payload() if trend else None
    payload["meta"] = meta
    return payload


def stage_temporal(bundle: Path, selector: str | None = None) -> None:
    write_canonical(
        artifact_path(bundle, "flowmap.json"), build_flowmap_payload(bundle, selector)
    )
    ratio_payload = build_ratio_payload(bundle, selector)
    write_canonical(artifact_path(bundle, "ratio.json"), ratio_payload)
    lines = ["t,V,E,r"]
    lines += [
        f"{e['t']},{e['nodes']},{e['edges']},{e['ratio']}"
        for e in ratio_payload["entries"]
    ]
    artifact_path(bundle, "ratio.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def stage_survey(bundle: Path) -> None:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    flows = load_flows(bundle, corpus)
    survey = generate_survey(flows, corpus, viewpoints)
    payload = survey.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    write_canonical(artifact_path(bundle, "survey.json"), payload)


def ingest_survey_responses(bundle: Path, responses: list[dict]):
    """Apply reviewer verdicts: update survey.json, push statuses into
    flows.json, and refresh the temporal artifacts that depend on them."""
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    survey_payload = read_json(artifact_path(bundle, "survey.json"))
    check_meta(survey_payload, corpus, "survey.json")
    survey = survey_from_payload(survey_payload)
    updated, stats = ingest_responses(survey, responses)
    payload = updated.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    payload["stats"] = stats.to_payload()
    write_canonical(artifact_path(bundle, "survey.json"), payload)

    flows = apply_verdicts(load_flows(bundle, corpus), updated)
    write_canonical(
        artifact_path(bundle, "flows.json"),
        {"flows": [flow_to_payload(f) for f in flows], "meta": bundle_meta(config, corpus)},
    )
    stage_temporal(bundle)
    write_manifest(bundle)
    return stats


def build_consistency_payload(bundle: Path) -> dict:
    config = load_config(bundle)
    corpus = load_bundle_corpus(bundle)
    viewpoints = load_viewpoints(bundle, corpus)
    sim_payload = read_json(artifact_path(bundle, "similarity.json"))
    ec_payload = read_json(artifact_path(bundle, "ec_matrix.json"))
    check_meta(sim_payload, corpus, "similarity.json")
    check_meta(ec_payload, corpus, "ec_matrix.json")
    report = consistency_report(
        matrix_from_payload(sim_payload),
        ec_matrix_from_payload(ec_payload),
        load_flows(bundle, corpus),
        corpus,
        viewpoints,
    )
    payload = report.to_payload()
    payload["meta"] = bundle_meta(config, corpus)
    return payload


STAGE_ARTIFACTS = (
    "corpus.json",
    "config.json",
    "viewpoints.json",
    "viewpoints_raw.json",
    "flows.json",
    "similarity.json",
    "graph_above.json",
    "graph_below.json",
    "layout.json",
    "ec_matrix.json",
    "ec_matrix.txt",
    "flowmap.json",
    "ratio.json",
    "ratio.csv",
    "survey.json",
)


def write_manifest(bundle: Path) -> None:
    bundle = Path(bundle)
    hashes = {}
    for name in STAGE_ARTIFACTS + ("pseudonyms.json",):
        path = bundle / name
        if path.exists():
            hashes[name] = sha256_hex(path.read_bytes())
    write_canonical(
        bundle / "manifest.json",
        {"artifacts": hashes, "bundle_fingerprint": fingerprint(hashes)},
    )


def run_pipeline(
    config: PipelineConfig,
    corpus_path: Path,
    out_dir: Path,
    mapping_path: Path | None = None,
) -> Path:
    """Run every stage into `out_dir`. Identical inputs + seed with the mock
    provider produce a byte-identical bundle."""
    out_dir = Path(out_dir)
    if config.provider == "http":
        resolve_provider(config)  # fail before any stage if credentials are missing
    stages = [
        ("ingest", lambda: stage_ingest(corpus_path, out_dir, config, mapping_path)),
        ("extract", lambda: stage_extract(out_dir)),
        ("flows", lambda: stage_flows(out_dir)),
        ("similarity", lambda: stage_similarity(out_dir)),
        ("graphs", lambda: stage_graphs(out_dir)),
        ("layout", lambda: stage_layout(out_dir)),
        ("influence", lambda: stage_influence(out_dir)),
        ("temporal", lambda: stage_temporal(out_dir)),
        ("survey", lambda: stage_survey(out_dir)),
    ]
    for name, stage in stages:
        try:
            stage()
        except (CorpusError, PipelineError, ValueError) as exc:
            raise PipelineError(f"stage {name} failed: {exc}") from exc
    write_manifest(out_dir)
    return out_dir
