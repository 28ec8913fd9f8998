import json

import pytest

from converge.corpus import Corpus, Domain, Presentation, load_fixture, save_corpus
from converge.jsonio import canonical_bytes, read_json, sha256_hex
from converge.pipeline import (
    ENV_ENDPOINT,
    ENV_KEY,
    ENV_MODEL,
    STAGE_ARTIFACTS,
    PipelineConfig,
    PipelineError,
    build_graph_payload,
    build_layout_payload,
    build_ratio_payload,
    check_meta,
    ingest_survey_responses,
    load_config,
    load_flows,
    load_viewpoints,
    resolve_provider,
    run_pipeline,
    stage_ingest,
)
from converge.providers import HttpProvider, MockProvider
from converge.semantics import MODE_ABOVE


def test_config_validation():
    with pytest.raises(PipelineError, match="provider"):
        PipelineConfig(provider="oracle")
    with pytest.raises(PipelineError, match="affinity"):
        PipelineConfig(affinity_backend="psychic")
    with pytest.raises(PipelineError, match="percentile"):
        PipelineConfig(percentile=0)
    with pytest.raises(PipelineError, match="selector"):
        PipelineConfig(flow_selector="some")
    with pytest.raises(PipelineError, match="dimension"):
        PipelineConfig(embedding_dimension=0)


def test_config_make_propagates_seed_to_layout():
    config = PipelineConfig.make(seed=7)
    assert config.seed == 7 and config.layout.seed == 7


def test_config_payload_round_trip():
    config = PipelineConfig.make(seed=11, percentile=75.0, include_quote=True)
    again = PipelineConfig.from_payload(config.to_payload())
    assert again == config


def test_resolve_provider(monkeypatch):
    assert isinstance(resolve_provider(PipelineConfig()), MockProvider)
    for var in (ENV_ENDPOINT, ENV_MODEL, ENV_KEY):
        monkeypatch.delenv(var, raising=False)
    with pytest.raises(PipelineError, match="requires environment variables"):
        resolve_provider(PipelineConfig(provider="http"))
    monkeypatch.setenv(ENV_ENDPOINT, "https://example.test/v1")
    monkeypatch.setenv(ENV_MODEL, "m1")
    monkeypatch.setenv(ENV_KEY, "k1")
    provider = resolve_provider(PipelineConfig(provider="http"))
    assert isinstance(provider, HttpProvider)


def test_bundle_contains_every_artifact(water11_bundle):
    for name in STAGE_ARTIFACTS + ("manifest.json",):
        assert (water11_bundle / name).exists(), name


def test_manifest_hashes_match_files(water11_bundle):
    manifest = read_json(water11_bundle / "manifest.json")
    for name, digest in manifest["artifacts"].items():
        assert sha256_hex((water11_bundle / name).read_bytes()) == digest


def test_no_timestamps_in_artifacts(water11_bundle):
    for name in STAGE_ARTIFACTS:
        if not name.endswith(".json"):
            continue
        text = (water11_bundle / name).read_text()
        for needle in ("timestamp", "created_at", "generated_at"):
            assert needle not in text, f"{needle} in {name}"


def test_check_meta_rejects_foreign_corpus(water11_bundle, planted_corpus):
    payload = read_json(water11_bundle / "viewpoints.json")
    with pytest.raises(PipelineError, match="was built for corpus"):
        check_meta(payload, planted_corpus, "viewpoints.json")
    with pytest.raises(PipelineError):
        load_viewpoints(water11_bundle, planted_corpus)


def test_stage_ingest_pseudonymizes(tmp_path):
    corpus = Corpus(
        domains=(Domain(code="AA", name="Alpha", keywords=("k",)),),
        presentations=(
            Presentation(id="p1", order_index=1, presenter="Dr. Real Name",
                         domain_code="AA", transcript="We need tools."),
        ),
    )
    src = tmp_path / "corpus.json"
    save_corpus(corpus, src)
    mapping_path = tmp_path / "map.json"
    mapping_path.write_text(json.dumps({"Dr. Real Name": "Starfire"}))
    bundle = tmp_path / "bundle"
    stored = stage_ingest(src, bundle, PipelineConfig.make(), mapping_path)
    assert stored.presentations[0].presenter == "Starfire"
    assert read_json(bundle / "pseudonyms.json") == {"Dr. Real Name": "Starfire"}
    assert "Dr. Real Name" not in (bundle / "corpus.json").read_text()


def test_graph_payload_matches_artifact_bytes(water11_bundle):
    config = load_config(water11_bundle)
    payload = build_graph_payload(water11_bundle, config.percentile, MODE_ABOVE)
    on_disk = (water11_bundle / "graph_above.json").read_bytes()
    assert canonical_bytes(payload) == on_disk


def test_layout_payload_seed_override(water11_bundle):
    base = build_layout_payload(water11_bundle)
    same = build_layout_payload(water11_bundle)
    other = build_layout_payload(water11_bundle, seed=7)
    assert canonical_bytes(base) == canonical_bytes(same)
    assert base["positions"] != other["positions"]
    assert other["params"]["seed"] == 7


def test_ratio_payload_selector_override(bundle_copy):
    default = build_ratio_payload(bundle_copy)
    accepted_only = build_ratio_payload(bundle_copy, selector="accepted")
    assert default["meta"]["selector"] == "all"
    assert accepted_only["meta"]["selector"] == "accepted"
    # nothing reviewed yet: every flow is proposed, none accepted
    assert all(entry["edges"] == 0 for entry in accepted_only["entries"])
    assert any(entry["edges"] > 0 for entry in default["entries"])


def test_survey_ingest_updates_dependent_artifacts(bundle_copy):
    corpus = load_fixture("corpus_water11")
    survey = read_json(bundle_copy / "survey.json")
    item_ids = [item["id"] for item in survey["items"]]
    assert item_ids, "survey should not be empty"
    reject = item_ids[0]
    accept = item_ids[1:]
    responses = [{"item_id": reject, "reviewer": "r1", "verdict": "disagree"}]
    responses += [{"item_id": iid, "reviewer": "r1", "verdict": "agree"} for iid in accept]

    before_ratio = read_json(bundle_copy / "ratio.json")
    before_manifest = read_json(bundle_copy / "manifest.json")
    stats = ingest_survey_responses(bundle_copy, responses)
    assert stats.reviewed == len(item_ids)
    assert stats.disagreed == 1

    survey_after = read_json(bundle_copy / "survey.json")
    assert survey_after["stats"]["disagreed"] == 1
    verdicts = {item["id"]: item["verdict"] for item in survey_after["items"]}
    assert verdicts[reject] == "disagree"

    flows_after = load_flows(bundle_copy, corpus)
    statuses = {
        f"{f.source.viewpoint_id}->{f.target.viewpoint_id}": f.status for f in flows_after
    }
    assert statuses[reject] == "rejected"
    assert all(status == "accepted" for key, status in statuses.items() if key != reject)

    # the rejected flow leaves the default series, so the ratio drops somewhere
    after_ratio = read_json(bundle_copy / "ratio.json")
    assert after_ratio != before_ratio
    total_edges_before = before_ratio["entries"][-1]["edges"]
    total_edges_after = after_ratio["entries"][-1]["edges"]
    assert total_edges_after == total_edges_before - 1

    after_manifest = read_json(bundle_copy / "manifest.json")
    assert after_manifest["bundle_fingerprint"] != before_manifest["bundle_fingerprint"]


def test_run_pipeline_wraps_stage_errors(tmp_path):
    with pytest.raises(PipelineError, match="stage ingest failed"):
        run_pipeline(PipelineConfig.make(), tmp_path / "missing.json", tmp_path / "out")


def test_run_pipeline_requires_http_credentials(tmp_path, monkeypatch):
    for var in (ENV_ENDPOINT, ENV_MODEL, ENV_KEY):
        monkeypatch.delenv(var, raising=False)
    with pytest.raises(PipelineError, match="environment variables"):
        run_pipeline(PipelineConfig.make(provider="http"), tmp_path / "c.json", tmp_path / "out")
    assert not (tmp_path / "out").exists()  # failed before any stage ran
