"""HTTP check service: the editor-facing front end over the pipeline.

The spec database is loaded once at startup and never mutated; inline
specs in a request shadow same-host startup specs for that request
only.
"""

from __future__ import annotations

import time
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from wac.conformance import CheckConfig, DEFAULT_CHECK_CONFIG
from wac.engine import check_sources
from wac.flow import AnalysisConfig, DEFAULT_CONFIG
from wac.specs import SpecDatabase, SpecError, load_spec


class CheckServiceRequest(BaseModel):
    code: str
    filename: Optional[str] = None
    specs: Optional[list[dict[str, Any]]] = None


class CheckServiceResponse(BaseModel):
    diagnostics: list[dict[str, Any]]
    analysisMs: int


class HealthResponse(BaseModel):
    status: str
    specs: int


def create_app(
    db: SpecDatabase,
    flow_cfg: AnalysisConfig = DEFAULT_CONFIG,
    check_cfg: CheckConfig = DEFAULT_CHECK_CONFIG,
) -> FastAPI:
    app = FastAPI(title="wac check service")

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", specs=len(db.specs))

    @app.post("/v1/check", response_model=CheckServiceResponse)
    def check(payload: CheckServiceRequest) -> Any:
        started = time.monotonic()
        effective = db
        if payload.specs:
            overrides = []
            for i, document in enumerate(payload.specs):
                try:
                    overrides.append(load_spec(document, spec_id=f"inline{i}"))
                except (SpecError, ValueError) as exc:
                    return JSONResponse(
                        status_code=400, content={"error": str(exc)}
                    )
            effective = db.with_overrides(overrides)
        filename = payload.filename or "input.js"
        result = check_sources([(filename, payload.code)], effective, flow_cfg, check_cfg)
        elapsed_ms = int((time.monotonic() - started) * 1000)
        return CheckServiceResponse(
            diagnostics=[d.to_json() for d in result.diagnostics],
            analysisMs=elapsed_ms,
        )

    return app
