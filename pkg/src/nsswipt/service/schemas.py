"""Request and response models shared by the HTTP app and the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

MethodName = Literal["alg1", "p24", "p22", "alg2", "benchmark", "benchmark_no_v"]
OutputFormat = Literal["csv", "plotdata"]


class Health(BaseModel):
    status: str = "ok"
    version: str


class ScenarioInfo(BaseModel):
    name: str
    description: str
    sweep: dict[str, list]
    methods: list[str]
    metrics: list[str]
    n_trials: int


class ScenarioRunRequest(BaseModel):
    """Run a built-in scenario by ``name`` or a scenario given as INI text."""

    name: Optional[str] = None
    scenario_file: Optional[str] = Field(None, description="INI text of a scenario file")
    seed: Optional[int] = None
    trials: Optional[int] = Field(None, ge=1)
    format: OutputFormat = "csv"
    to_dB: bool = False
    workers: Optional[int] = Field(None, ge=1)


class ScenarioRunResponse(BaseModel):
    scenario: str
    format: OutputFormat
    n_rows: int
    content: str


class JobStatus(BaseModel):
    id: str
    state: Literal["queued", "running", "done", "failed"]
    result: Optional[ScenarioRunResponse] = None
    error: Optional[str] = None


class SolveRequest(BaseModel):
    config: Optional[str] = Field(None, description="INI text; defaults when omitted")
    method: MethodName = "alg1"
    seed: Optional[int] = None
    tol: Optional[float] = Field(None, gt=0)
    waveform: Optional[Literal["gaussian", "dsw"]] = None
    n_symbols: int = Field(10_000, ge=1)


class SolveResponse(BaseModel):
    method: str
    status: str
    feasible: bool
    reason: Optional[str] = None
    total_power: float
    P_I: list[float]
    P_E: list[float]
    worst_capacity: Optional[float] = None
    capacity: Optional[list[float]] = None
    total_rf_power: Optional[float] = None
    total_dc_power: Optional[float] = None
    record: str


class ComplexityRequest(BaseModel):
    M: int = Field(..., ge=1)
    K_I: int = Field(..., ge=1)
    K_E: int = Field(..., ge=1)
    r_I: Optional[int] = Field(None, ge=0)
    r_E: Optional[int] = Field(None, ge=0)


class ComplexityRow(BaseModel):
    method: str
    complexity: float
    reduction_vs_alg2: Optional[float] = None


class ComplexityResponse(BaseModel):
    inputs: ComplexityRequest
    rows: list[ComplexityRow]
    csv: str
