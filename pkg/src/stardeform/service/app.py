"""HTTP front end: scenario execution behind two POST endpoints.

Verification failures are still HTTP 200 (the report carries the
verdict); only unusable requests map to 400.
"""

from fastapi import FastAPI, HTTPException

from ..scenarios import (
    ENGINE_VERSION,
    ScenarioError,
    run_builtin_suite,
    run_scenario_dict,
)
from .models import CheckRequest, ReportResponse, RunRequest


def create_app() -> FastAPI:
    app = FastAPI(title="stardeform", version=ENGINE_VERSION)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": ENGINE_VERSION}

    @app.post("/run", response_model=ReportResponse)
    def run(req: RunRequest) -> ReportResponse:
        try:
            rep = run_scenario_dict(req.scenario, order_override=req.order,
                                    seed_override=req.seed,
                                    timings=req.timings)
        except ScenarioError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return ReportResponse(passed=rep.passed, report=rep.payload)

    @app.post("/check", response_model=ReportResponse)
    def check(req: CheckRequest) -> ReportResponse:
        try:
            rep = run_builtin_suite(req.suite, seed=req.seed,
                                    timings=req.timings)
        except ScenarioError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return ReportResponse(passed=rep.passed, report=rep.payload)

    return app
