"""HTTP facade over experiment execution.

Endpoints (JSON over HTTP/1.1):

    POST /api/v1/run                 synchronous experiment execution
    GET  /api/v1/health              liveness: runs a one-event simulation
    GET  /api/v1/examples/{model}    shipped example configuration

Requests are stateless; each run gets its own engine and streams, so the
response for a document is identical to a CLI run of the same document and
seed. Oversized bodies are rejected with 413, invalid configurations with
422 naming the offending field path, and runs larger than the synchronous
execution cap with 422 (the cap keeps the service responsive without a job
queue: desk-scale models complete in seconds).
"""

from __future__ import annotations

import json
import time
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from . import __version__
from .config import example_document, load_experiment
from .engine import Engine
from .errors import ConfigError
from .experiment import ResultSet, run_single
from .reporting import all_series

MAX_BODY_BYTES = 1 << 20  # 1 MiB
# run_length x replications cap, in model time units; generous for the
# shipped defaults (CCU year x 5 reps = 43,800)
MAX_RUN_BUDGET = 1_000_000.0


def _error_response(status: int, loc: list, msg: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": [{"loc": loc, "msg": msg}]})


def result_set_to_json(results: ResultSet, duration_ms: float, tag: Optional[str]) -> dict:
    scenarios = []
    for s in results.scenarios:
        scenarios.append({
            "label": s.label,
            "value": s.value,
            "n_replications": s.summary.n_replications,
            "kpis": {
                k: {"mean": s.summary.kpi_means[k], "sd": s.summary.kpi_sds[k]}
                for k in s.summary.kpi_means
            },
            "occupancy": {
                unit: [{"occupancy": k, "probability": p} for k, p in dist.pmf().items()]
                for unit, dist in s.occupancy.items()
            },
            "delay": {
                unit: [
                    {"capacity": c, "p_delay": p}
                    for c, p in zip(curve.capacities, curve.probabilities)
                ]
                for unit, curve in s.delay.items()
            },
            "flags": list(s.summary.flags),
        })
    series = [
        {
            "name": ch.name,
            "kind": ch.kind,
            "x": list(ch.x),
            "y": list(ch.y),
            "err": list(ch.err) if ch.err is not None else None,
            "x_label": ch.x_label,
            "y_label": ch.y_label,
            "title": ch.title,
        }
        for ch in all_series(results)
    ]
    return {
        "model": results.model_id,
        "seed": results.master_seed,
        "tag": tag,
        "duration_ms": duration_ms,
        "scenarios": scenarios,
        "series": series,
    }


def create_app(cors_origins=None) -> FastAPI:
    app = FastAPI(title="wardsim", version=__version__)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.post("/api/v1/run")
    async def run_endpoint(request: Request):
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error_response(413, ["body"], f"request body exceeds {MAX_BODY_BYTES} bytes")
        try:
            doc = json.loads(body) if body else None
        except json.JSONDecodeError as exc:
            return _error_response(422, ["body"], f"invalid JSON: {exc}")
        if not isinstance(doc, dict):
            return _error_response(422, ["body"], "expected a configuration object")
        tag = doc.pop("tag", None)
        try:
            exp = load_experiment(doc)
        except ConfigError as exc:
            loc = ["body"] + (exc.path.split(".") if exc.path else [])
            return _error_response(422, loc, exc.message)
        budget = exp.run_length * exp.n_replications
        if budget > MAX_RUN_BUDGET:
            return _error_response(
                422, ["body", "replications"],
                f"run_length x replications = {budget:g} exceeds the synchronous "
                f"execution cap of {MAX_RUN_BUDGET:g}; reduce one of them",
            )
        started = time.perf_counter()
        # simulations are CPU-bound; hand them to the threadpool so slow runs
        # do not block unrelated requests (each run owns its engine/streams)
        results = await run_in_threadpool(run_single, exp)
        duration_ms = (time.perf_counter() - started) * 1000.0
        return JSONResponse(result_set_to_json(results, duration_ms, tag))

    @app.get("/api/v1/health")
    def health_endpoint():
        started = time.perf_counter()
        engine = Engine()
        fired = []
        engine.schedule(1.0, lambda: fired.append(engine.now))
        engine.run_until(2.0)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        if fired != [1.0]:
            return JSONResponse(status_code=503, content={"status": "failed", "version": __version__})
        return {"status": "ok", "version": __version__, "check_ms": elapsed_ms}

    @app.get("/api/v1/examples/{model_id}")
    def examples_endpoint(model_id: str):
        try:
            return example_document(model_id)
        except KeyError:
            return _error_response(404, ["path", "model_id"], f"unknown model {model_id!r}")

    return app
