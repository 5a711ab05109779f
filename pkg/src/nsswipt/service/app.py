"""FastAPI app. Run with ``uvicorn nsswipt.service.app:app`` or ``nsswipt serve``.

Scenario runs can take minutes, so besides the blocking endpoint there is a
small in-memory job queue (``POST /jobs``, ``GET /jobs/{id}``) that runs one
scenario at a time in a worker thread.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from ..errors import ConfigurationError
from . import handlers, schemas

app = FastAPI(title="nsswipt", description="Null-space SWIPT beamforming service")

_jobs: dict[str, schemas.JobStatus] = {}
_jobs_lock = threading.Lock()
_executor = ThreadPoolExecutor(max_workers=1)


@app.exception_handler(ConfigurationError)
def _config_error(request, exc: ConfigurationError):
    body = {"detail": str(exc)}
    if isinstance(exc, handlers.UnknownScenario):
        return JSONResponse(status_code=404, content={**body, "known": exc.known})
    return JSONResponse(status_code=422, content=body)


@app.get("/health", response_model=schemas.Health)
def health():
    return handlers.health()


@app.get("/scenarios", response_model=list[schemas.ScenarioInfo])
def scenarios():
    return handlers.list_scenarios()


@app.post("/scenarios/run", response_model=schemas.ScenarioRunResponse)
def run_scenario(req: schemas.ScenarioRunRequest):
    return handlers.run_scenario(req)


@app.post("/scenarios/{name}/run", response_model=schemas.ScenarioRunResponse)
def run_named_scenario(name: str, req: schemas.ScenarioRunRequest | None = None):
    req = (req or schemas.ScenarioRunRequest()).model_copy(update={"name": name})
    return handlers.run_scenario(req)


@app.post("/solve", response_model=schemas.SolveResponse)
def solve(req: schemas.SolveRequest):
    return handlers.solve_one(req)


@app.post("/complexity", response_model=schemas.ComplexityResponse)
def complexity(req: schemas.ComplexityRequest):
    return handlers.complexity(req)


def _run_job(job_id: str, req: schemas.ScenarioRunRequest):
    with _jobs_lock:
        _jobs[job_id].state = "running"
    try:
        result = handlers.run_scenario(req)
        update = {"state": "done", "result": result}
    except Exception as exc:  # reported through the job record
        update = {"state": "failed", "error": str(exc)}
    with _jobs_lock:
        for k, v in update.items():
            setattr(_jobs[job_id], k, v)


@app.post("/jobs", response_model=schemas.JobStatus, status_code=202)
def submit_job(req: schemas.ScenarioRunRequest):
    handlers.resolve_scenario(req)  # reject bad requests before queueing
    job = schemas.JobStatus(id=uuid.uuid4().hex, state="queued")
    with _jobs_lock:
        _jobs[job.id] = job
    _executor.submit(_run_job, job.id, req)
    return job


@app.get("/jobs/{job_id}", response_model=schemas.JobStatus)
def job_status(job_id: str):
    with _jobs_lock:
        job = _jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job.model_copy()
