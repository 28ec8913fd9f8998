"""Read-mostly HTTP service over a pipeline bundle.

Graph, layout, and matrix responses are rendered through the same canonical
JSON encoder as the CLI exporters, so a response body and the corresponding
CLI export are byte-identical. The only mutating route is the survey
response endpoint; writes are serialized through a single lock.
"""
from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import Response
from pydantic import BaseModel, Field

from converge import pipeline
from converge.jsonio import canonical_bytes, read_json
from converge.review import ReviewError
from converge.semantics import MODE_ABOVE, MODE_BELOW, SemanticsError
from converge.temporal import SELECTORS

MODE_ALIASES = {
    "above": MODE_ABOVE,
    "below": MODE_BELOW,
    MODE_ABOVE: MODE_ABOVE,
    MODE_BELOW: MODE_BELOW,
}


class SurveyResponseItem(BaseModel):
    item_id: str
    reviewer: str
    verdict: str
    comment: str = ""


class SurveyResponseBatch(BaseModel):
    responses: list[SurveyResponseItem] = Field(default_factory=list)


class LayoutRequest(BaseModel):
    seed: int


def canonical_response(payload: dict) -> Response:
    return Response(content=canonical_bytes(payload), media_type="application/json")


def create_app(bundle: Path) -> FastAPI:
    bundle = Path(bundle)
    if not (bundle / "manifest.json").exists():
        raise pipeline.PipelineError(f"{bundle} is not a pipeline bundle (no manifest)")
    app = FastAPI(title="converge", docs_url=None, redoc_url=None)
    write_lock = threading.Lock()

    @app.get("/api/graph")
    def get_graph(
        percentile: float | None = Query(default=None), mode: str = Query(default="above")
    ) -> Response:
        resolved_mode = MODE_ALIASES.get(mode)
        if resolved_mode is None:
            raise HTTPException(status_code=422, detail=f"unknown mode {mode!r}")
        if percentile is None:
            percentile = pipeline.load_config(bundle).percentile
        try:
            payload = pipeline.build_graph_payload(bundle, percentile, resolved_mode)
        except SemanticsError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return canonical_response(payload)

    @app.get("/api/layout")
    def get_layout() -> Response:
        path = bundle / "layout.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail="layout not computed")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.post("/api/layout")
    def post_layout(request: LayoutRequest) -> Response:
        # explicit recomputation (the slow step); does not overwrite the bundle
        payload = pipeline.build_layout_payload(bundle, seed=request.seed)
        return canonical_response(payload)

    @app.get("/api/ec-matrix")
    def get_ec_matrix() -> Response:
        path = bundle / "ec_matrix.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail="EC matrix not computed")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/api/flows")
    def get_flows(selector: str | None = Query(default=None)) -> Response:
        if selector is not None and selector not in SELECTORS:
            raise HTTPException(status_code=422, detail=f"unknown selector {selector!r}")
        return canonical_response(pipeline.build_flowmap_payload(bundle, selector))

    @app.get("/api/ratio")
    def get_ratio(selector: str | None = Query(default=None)) -> Response:
        if selector is not None and selector not in SELECTORS:
            raise HTTPException(status_code=422, detail=f"unknown selector {selector!r}")
        return canonical_response(pipeline.build_ratio_payload(bundle, selector))

    @app.get("/api/survey")
    def get_survey() -> Response:
        path = bundle / "survey.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail="survey not generated")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.post("/api/survey/responses")
    def post_survey_responses(batch: SurveyResponseBatch) -> Response:
        with write_lock:
            try:
                stats = pipeline.ingest_survey_responses(
                    bundle, [item.model_dump() for item in batch.responses]
                )
            except ReviewError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return canonical_response({"stats": stats.to_payload()})

    @app.get("/api/report/consistency")
    def get_consistency() -> Response:
        try:
            payload = pipeline.build_consistency_payload(bundle)
        except pipeline.PipelineError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return canonical_response(payload)

    @app.get("/api/viewpoints")
    def get_viewpoints() -> Response:
        # full viewpoint text for the explorer's node details panel
        path = bundle / "viewpoints.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail="viewpoints not extracted")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/api/manifest")
    def get_manifest() -> Response:
        return canonical_response(read_json(bundle / "manifest.json"))

    return app


def serve(bundle: Path, host: str = "127.0.0.1", port: int = 8321, ui_dir: Path | None = None):
    import uvicorn

    app = create_app(bundle)
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)
