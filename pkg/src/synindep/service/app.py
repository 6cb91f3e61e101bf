"""FastAPI application exposing the test pipeline over HTTP.

Run with ``uvicorn synindep.service.app:app``.  Worker thread count for
Monte Carlo endpoints comes from the ``SYNINDEP_THREADS`` environment
variable and never changes results, only speed.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException

from ..config import ConfigError
from . import handlers
from . import schemas as sm


def _threads() -> int:
    return max(1, int(os.environ.get("SYNINDEP_THREADS", "1")))


def create_app() -> FastAPI:
    app = FastAPI(title="synindep", version=handlers.version())

    def guarded(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.get("/health", response_model=sm.HealthResponse)
    def health() -> sm.HealthResponse:
        return sm.HealthResponse(status="ok", version=handlers.version())

    @app.post("/simulate", response_model=sm.SimulateResponse)
    def simulate(req: sm.SimulateRequest) -> sm.SimulateResponse:
        return guarded(handlers.handle_simulate, req, threads=_threads())

    @app.post("/test/iid", response_model=sm.TestResponse)
    def test_iid(req: sm.IidTestRequest) -> sm.TestResponse:
        return guarded(handlers.handle_test_iid, req, threads=_threads())

    @app.post("/test/robust", response_model=sm.TestResponse)
    def test_robust(req: sm.RobustTestRequest) -> sm.TestResponse:
        return guarded(handlers.handle_test_robust, req, threads=_threads())

    @app.post("/sps/region", response_model=sm.SpsRegionResponse)
    def region(req: sm.SpsRegionRequest) -> sm.SpsRegionResponse:
        return guarded(handlers.handle_sps_region, req, threads=_threads())

    @app.post("/power-curve", response_model=sm.PowerCurveResponse)
    def power_curve(req: sm.PowerCurveRequest) -> sm.PowerCurveResponse:
        return guarded(handlers.handle_power_curve, req, threads=_threads())

    @app.post("/selftest", response_model=sm.SelftestResponse)
    def selftest() -> sm.SelftestResponse:
        return handlers.handle_selftest(threads=_threads())

    return app


app = create_app()
