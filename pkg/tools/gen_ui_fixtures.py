"""Capture service responses as frontend test fixtures.

Runs the pipeline on the bundled corpus, then records the exact HTTP bodies
the explorer consumes, including the survey/ratio state before and after one
disagree verdict. Rerun after any change that affects artifact bytes.
"""
from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from converge.corpus import fixture_path
from converge.pipeline import PipelineConfig, run_pipeline
from converge.service import create_app

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


def snap(client: TestClient, route: str, name: str, **params) -> dict:
    response = client.get(route, params=params or None)
    response.raise_for_status()
    (OUT / name).write_bytes(response.content)
    return response.json()


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        bundle = Path(tmp) / "bundle"
        run_pipeline(PipelineConfig.make(seed=42), fixture_path("corpus_water11"), bundle)
        client = TestClient(create_app(bundle))

        graph = snap(client, "/api/graph", "graph_p90.json", percentile=90, mode="above")
        tighter = snap(client, "/api/graph", "graph_p95.json", percentile=95, mode="above")
        snap(client, "/api/layout", "layout.json")
        snap(client, "/api/flows", "flows.json")
        snap(client, "/api/viewpoints", "viewpoints.json")
        survey = snap(client, "/api/survey", "survey_before.json")
        snap(client, "/api/ratio", "ratio_before.json")

        first = survey["items"][0]["id"]
        post = client.post(
            "/api/survey/responses",
            json={"responses": [{"item_id": first, "reviewer": "r1", "verdict": "disagree"}]},
        )
        post.raise_for_status()
        (OUT / "post_response.json").write_bytes(post.content)

        snap(client, "/api/survey", "survey_after.json")
        snap(client, "/api/ratio", "ratio_after.json")

        domains = sorted({n["domain"] for n in graph["nodes"]})
        print(
            f"nodes={len(graph['nodes'])} domains={len(domains)} "
            f"edges p90={len(graph['edges'])} p95={len(tighter['edges'])} "
            f"rejected_item={first}"
        )


if __name__ == "__main__":
    main()
