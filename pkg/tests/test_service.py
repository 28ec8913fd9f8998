import pytest
from fastapi.testclient import TestClient

from converge.jsonio import canonical_bytes, read_json
from converge.pipeline import PipelineError, load_config
from converge.service import create_app


@pytest.fixture(scope="module")
def client(water11_bundle):
    return TestClient(create_app(water11_bundle))


def test_create_app_requires_manifest(tmp_path):
    with pytest.raises(PipelineError, match="no manifest"):
        create_app(tmp_path)


def test_artifact_endpoints_serve_exact_bytes(client, water11_bundle):
    routes = {
        "/api/layout": "layout.json",
        "/api/ec-matrix": "ec_matrix.json",
        "/api/flows": "flowmap.json",
        "/api/ratio": "ratio.json",
        "/api/survey": "survey.json",
        "/api/viewpoints": "viewpoints.json",
        "/api/manifest": "manifest.json",
    }
    for route, artifact in routes.items():
        resp = client.get(route)
        assert resp.status_code == 200, route
        assert resp.content == (water11_bundle / artifact).read_bytes(), route


def test_graph_default_matches_bundle(client, water11_bundle):
    resp = client.get("/api/graph")
    assert resp.status_code == 200
    assert resp.content == (water11_bundle / "graph_above.json").read_bytes()


def test_graph_mode_aliases(client):
    canonical = client.get("/api/graph", params={"mode": "below_threshold"})
    alias = client.get("/api/graph", params={"mode": "below"})
    assert canonical.status_code == alias.status_code == 200
    assert canonical.content == alias.content
    assert client.get("/api/graph", params={"mode": "sideways"}).status_code == 422


def test_graph_percentile_query(client):
    low = client.get("/api/graph", params={"percentile": 10})
    high = client.get("/api/graph", params={"percentile": 99})
    assert low.status_code == high.status_code == 200
    n_low = len(low.json()["edges"])
    n_high = len(high.json()["edges"])
    assert n_low >= n_high  # raising the cut keeps fewer high-similarity pairs
    assert client.get("/api/graph", params={"percentile": 0}).status_code == 422


def test_layout_recompute_not_persisted(client, water11_bundle):
    before = (water11_bundle / "layout.json").read_bytes()
    resp = client.post("/api/layout", json={"seed": 7})
    assert resp.status_code == 200
    assert resp.json()["params"]["seed"] == 7
    assert resp.content != before
    assert (water11_bundle / "layout.json").read_bytes() == before
    assert client.get("/api/layout").content == before


def test_ratio_selector_validation(client):
    ok = client.get("/api/ratio", params={"selector": "accepted"})
    assert ok.status_code == 200
    assert ok.json()["meta"]["selector"] == "accepted"
    assert client.get("/api/ratio", params={"selector": "bogus"}).status_code == 422


def test_consistency_report(client):
    resp = client.get("/api/report/consistency")
    assert resp.status_code == 200
    assert {"aligned", "statements", "top_by_similarity", "top_by_flows"} <= resp.json().keys()


def test_survey_post_updates_bundle(bundle_copy):
    local = TestClient(create_app(bundle_copy))
    survey = local.get("/api/survey").json()
    first = survey["items"][0]["id"]
    ratio_before = local.get("/api/ratio").content

    resp = local.post("/api/survey/responses", json={
        "responses": [{"item_id": first, "reviewer": "r1", "verdict": "disagree"}],
    })
    assert resp.status_code == 200
    stats = resp.json()["stats"]
    assert stats["reviewed"] == 1 and stats["disagreed"] == 1

    assert read_json(bundle_copy / "survey.json")["stats"]["disagreed"] == 1
    ratio_after = local.get("/api/ratio").content
    assert ratio_after != ratio_before  # rejected flow left the series

    # a later batch on another item keeps the earlier verdict in the stats
    second = survey["items"][1]["id"]
    resp2 = local.post("/api/survey/responses", json={
        "responses": [{"item_id": second, "reviewer": "r1", "verdict": "agree"}],
    })
    assert resp2.status_code == 200
    stats2 = resp2.json()["stats"]
    assert stats2["reviewed"] == 2
    assert stats2["disagreed"] == 1 and stats2["agreed"] == 1
    assert read_json(bundle_copy / "survey.json")["stats"]["reviewed"] == 2

    conflict = local.post("/api/survey/responses", json={
        "responses": [{"item_id": first, "reviewer": "r2", "verdict": "agree"}],
    })
    assert conflict.status_code == 422
    assert "already reviewed" in conflict.json()["detail"]

    bad = local.post("/api/survey/responses", json={
        "responses": [{"item_id": "zz->zz", "reviewer": "r1", "verdict": "agree"}],
    })
    assert bad.status_code == 422


def test_http_bytes_match_cli_bytes(client, water11_bundle):
    config = load_config(water11_bundle)
    resp = client.get("/api/graph", params={"percentile": config.percentile})
    from converge.pipeline import build_graph_payload
    from converge.semantics import MODE_ABOVE
    payload = build_graph_payload(water11_bundle, config.percentile, MODE_ABOVE)
    assert resp.content == canonical_bytes(payload)
