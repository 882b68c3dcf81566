"""FastAPI application: patient reports, cohort analytics, explanations, and
the static physician-facing UI when a frontend build is present."""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from stagegraph.analytics import export_matrix
from stagegraph.errors import StagegraphError, UnknownResourceError
from stagegraph.pipeline import (
    ServiceConfig,
    World,
    bootstrap_world,
    classify_step,
    infer_step,
    load_config,
    load_world,
    restage_step,
)
from stagegraph.service import reports, schemas

EDITIONS_HELP = "ajcc7 or ajcc8 (AJCC 6th edition staging is not supported)"


def _edition_or_400(value: str) -> str:
    try:
        return reports.edition_token(value)
    except UnknownResourceError:
        raise HTTPException(
            status_code=400,
            detail=f"unsupported edition {value!r}: choose {EDITIONS_HELP}",
        )


def create_app(world: World | None = None, config: ServiceConfig | None = None) -> FastAPI:
    app = FastAPI(
        title="stagegraph",
        description="Guideline-driven breast cancer staging over a knowledge graph",
    )
    state = {"world": world}
    write_lock = threading.Lock()

    def get_world() -> World:
        if state["world"] is None:
            cfg = config or load_config()
            if os.environ.get("STAGEGRAPH_BOOTSTRAP") == "1":
                state["world"] = bootstrap_world(cfg)
            else:
                state["world"] = load_world(cfg)
        return state["world"]

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/editions")
    def editions() -> list[str]:
        return ["ajcc7", "ajcc8"]

    @app.get("/api/patients", response_model=list[schemas.PatientSummary])
    def patients():
        return reports.list_patients(get_world())

    @app.get("/api/patients/{patient_id}/report", response_model=schemas.PatientReport)
    def patient_report(patient_id: str, edition: str = Query("ajcc8")):
        token = _edition_or_400(edition)
        try:
            return reports.build_patient_report(get_world(), patient_id, token)
        except UnknownResourceError as error:
            raise HTTPException(status_code=404, detail=str(error))

    @app.get("/api/matrix", response_model=schemas.MatrixResponse)
    def matrix(from_edition: str = Query("ajcc7"), to_edition: str = Query("ajcc8")):
        src = _edition_or_400(from_edition)
        dst = _edition_or_400(to_edition)
        _, result = restage_step(get_world(), src, dst)
        return JSONResponse(content=json.loads(export_matrix(result, "json")))

    @app.get("/api/transitions", response_model=schemas.TransitionsResponse)
    def transitions(from_edition: str = Query("ajcc7"), to_edition: str = Query("ajcc8")):
        src = _edition_or_400(from_edition)
        dst = _edition_or_400(to_edition)
        result, _ = restage_step(get_world(), src, dst)
        return schemas.TransitionsResponse(
            from_edition=src,
            to_edition=dst,
            changes=[
                schemas.TransitionEntry(
                    patient=change.patient.rsplit("/", 1)[1],
                    from_stage=change.from_stage,
                    to_stage=change.to_stage,
                    direction=change.direction,
                )
                for change in result.changes
            ],
            exclusions=[
                {"patient": patient.rsplit("/", 1)[1], "reason": reason}
                for patient, reason in result.exclusions
            ],
        )

    @app.post("/api/restage", response_model=schemas.MatrixResponse)
    def restage(request: schemas.RestageRequest):
        src = _edition_or_400(request.from_edition)
        dst = _edition_or_400(request.to_edition)
        world_ = get_world()
        with write_lock:
            classify_step(world_)
            infer_step(world_)
            _, result = restage_step(world_, src, dst)
        return JSONResponse(content=json.loads(export_matrix(result, "json")))

    @app.post("/api/infer", response_model=schemas.FixpointSummary)
    def infer():
        world_ = get_world()
        with write_lock:
            classify_step(world_)
            report = infer_step(world_)
        return schemas.FixpointSummary(
            iterations=report.iterations,
            inferred_quad_count=report.inferred_quad_count,
            nanopubs_created=report.nanopubs_created,
        )

    @app.get("/api/explanations", response_model=schemas.ExplanationResponse)
    def explanation(assertion: str):
        try:
            return reports.explanation_for_assertion(get_world(), assertion)
        except UnknownResourceError as error:
            raise HTTPException(status_code=404, detail=str(error))

    ui_dir = os.environ.get("STAGEGRAPH_UI_DIR", "frontend/dist")
    if Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(StagegraphError)
    def domain_error(_, exc: StagegraphError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    return app
