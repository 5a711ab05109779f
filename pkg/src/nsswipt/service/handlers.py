"""Transport-independent request handlers.

The HTTP app and the in-process CLI path both call these, so a command
gives the same bytes whether or not it goes through a server.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .. import __version__, harness
from ..beamformers import SDR_TOL, evaluate, solve
from ..complexity import ComplexityInputs, complexity_table, table_to_csv
from ..config import load_scenario, load_system_config
from ..errors import ConfigurationError
from ..system_model import SystemConfig, generate_channels
from . import schemas


class UnknownScenario(ConfigurationError):
    def __init__(self, name: str, known: list[str]):
        super().__init__(f"unknown scenario {name!r}; known scenarios: {', '.join(known)}")
        self.known = known


def health() -> schemas.Health:
    return schemas.Health(version=__version__)


def list_scenarios() -> list[schemas.ScenarioInfo]:
    out = []
    for name, sc in sorted(harness.builtin_scenarios().items()):
        out.append(schemas.ScenarioInfo(
            name=name, description=sc.description,
            sweep={k: [_json_num(v) for v in vals] for k, vals in sc.sweep},
            methods=[m.label for m in sc.methods], metrics=list(sc.metrics),
            n_trials=sc.n_trials))
    return out


def _json_num(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def resolve_scenario(req: schemas.ScenarioRunRequest) -> harness.Scenario:
    if req.scenario_file is not None:
        sc = load_scenario(req.scenario_file)
    elif req.name is not None:
        known = harness.builtin_scenarios()
        if req.name not in known:
            raise UnknownScenario(req.name, sorted(known))
        sc = known[req.name]
    else:
        raise ConfigurationError("give a scenario name or a scenario file")
    if req.seed is not None:
        sc = replace(sc, seed=req.seed)
    if req.trials is not None:
        sc = replace(sc, n_trials=req.trials)
    return sc


def run_scenario(req: schemas.ScenarioRunRequest) -> schemas.ScenarioRunResponse:
    sc = resolve_scenario(req)
    rt = harness.run_scenario(sc, workers=req.workers)
    if req.format == "csv":
        content = harness.to_csv(rt, to_dB=req.to_dB)
    else:
        content = harness.to_plot_data(rt, to_dB=req.to_dB)
    return schemas.ScenarioRunResponse(scenario=sc.name, format=req.format,
                                       n_rows=len(rt), content=content)


def solve_one(req: schemas.SolveRequest) -> schemas.SolveResponse:
    cfg = load_system_config(req.config) if req.config else SystemConfig()
    if req.seed is not None:
        cfg = cfg.with_(rng_seed=req.seed)
    ch = generate_channels(cfg)
    sol = solve(req.method, ch, cfg, tol=req.tol or SDR_TOL)
    resp = dict(method=sol.method, status=sol.status, feasible=sol.feasible,
                reason=sol.diagnostics.get("reason"), total_power=sol.total_power,
                P_I=sol.P_I.tolist(), P_E=sol.P_E.tolist(), record=sol.to_record())
    if sol.feasible:
        rep = evaluate(ch, sol, cfg, waveform=req.waveform, n_symbols=req.n_symbols,
                       seed=cfg.rng_seed)
        resp.update(worst_capacity=rep.worst_capacity, capacity=rep.capacity.tolist(),
                    total_rf_power=rep.total_rf_power, total_dc_power=rep.total_dc_power)
    return schemas.SolveResponse(**resp)


def complexity(req: schemas.ComplexityRequest) -> schemas.ComplexityResponse:
    rows = complexity_table(ComplexityInputs(req.M, req.K_I, req.K_E, req.r_I, req.r_E))
    return schemas.ComplexityResponse(
        inputs=req,
        rows=[schemas.ComplexityRow(method=r["method"], complexity=r["complexity"],
                                    reduction_vs_alg2=r["reduction_vs_alg2"]) for r in rows],
        csv=table_to_csv(rows))
