"""Small HTTP wrapper around the planner and the closed-loop simulator.

The core stays import-level callable; this module only maps the scenario
configuration document onto the in-process API for callers that prefer a
service boundary.  Run with: uvicorn parafoil_scp.service:app
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from . import __version__
from .config import ScenarioConfig, build_gains, build_scenario, build_truth
from .control_sim import fly
from .planner import plan

app = FastAPI(title="parafoil-scp", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/plan")
def plan_endpoint(cfg: ScenarioConfig, seed: int | None = None) -> dict:
    scenario = build_scenario(cfg, seed=seed)
    try:
        reference, diag = plan(scenario)
    except Exception as exc:  # planner precondition violations
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {
        "trajectory": reference.to_records(),
        "diagnostics": diag.to_dict(),
    }


@app.post("/fly")
def fly_endpoint(
    cfg: ScenarioConfig,
    seed: int | None = None,
    replan_threshold: float | None = None,
) -> dict:
    scenario = build_scenario(cfg, seed=seed)
    truth = build_truth(cfg, seed=seed)
    threshold = (
        replan_threshold
        if replan_threshold is not None
        else cfg.campaign.replan_threshold
    )
    if threshold is None or threshold <= 0:
        threshold = math.inf
    try:
        record, log = fly(scenario, build_gains(cfg), truth,
                          replan_threshold=threshold)
    except Exception as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {"landing": record.to_dict(), "log": log}
