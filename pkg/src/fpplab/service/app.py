"""HTTP API over the laboratory.

Every experiment endpoint returns a full report document: command,
parameters, results, seed, version, wall time.  The `results` payload is
deterministic in (parameters, seed); domain validation failures surface
as 422 responses carrying the underlying message, so the CLI can map
them to its usage exit code.
"""

from __future__ import annotations

import time
from typing import Any, Callable, Union

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .. import __version__, opercolation, saw
from ..dist import (
    ORIENTED_PC_BY_DIMENSION,
    WeightDistribution,
    dim_bound_formula,
    is_alm_deijfen_counterexample,
    parse_distribution,
    tertile_bounds,
)
from ..estimate import (
    ExperimentConfig,
    counterexample_experiment,
    estimate_mu,
    median_suite,
    verify_theorem,
)
from ..lattice import make_field
from ..reports import ReportDocument
from ..selftest import run_selftest
from . import models


def _plain(obj: Any) -> Any:
    """Strip numpy scalar types and stringify dict keys for JSON transport."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _parse_dist(doc: Union[str, dict]) -> WeightDistribution:
    try:
        return parse_distribution(doc)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=f"bad distribution: {exc}") from exc


def _report(command: str, request: BaseModel, seed: int, worker: Callable[[], dict]) -> dict:
    parameters = request.model_dump(mode="json", exclude={"seed", "threads"})
    t0 = time.perf_counter()
    try:
        results = worker()
    except HTTPException:
        raise
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    wall = time.perf_counter() - t0
    doc = ReportDocument(
        command=command,
        parameters=parameters,
        results=_plain(results),
        seed=seed,
        wall_time_seconds=wall,
    )
    return doc.as_dict()


def create_app() -> FastAPI:
    app = FastAPI(title="fpplab", version=__version__)

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/api/bounds")
    def bounds(req: models.BoundsRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            results = tertile_bounds(F).as_dict()
            results["is_counterexample_family"] = is_alm_deijfen_counterexample(F)
            if req.d is not None:
                pc_d = req.pc_d if req.pc_d is not None else ORIENTED_PC_BY_DIMENSION.get(req.d)
                if pc_d is None:
                    raise HTTPException(
                        status_code=422,
                        detail=f"no shipped oriented threshold for d={req.d}; pass pc_d",
                    )
                lo, hi = dim_bound_formula(F, req.d, pc_d)
                results["dim_bound"] = {
                    "d": req.d,
                    "pc_d": pc_d,
                    "lower_bound": lo,
                    "upper_bound": hi,
                }
            return results

        return _report("bounds", req, 0, worker)

    @app.post("/api/estimate")
    def estimate(req: models.EstimateRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            config = ExperimentConfig(
                n_grid=tuple(req.n_grid),
                replicates=req.replicates,
                base_seed=req.seed,
                margin_factor=req.margin_factor,
            )
            estimates = estimate_mu(F, config, threads=req.threads)
            verdicts = [verify_theorem(F, e) for e in estimates]
            return {
                "estimates": [e.as_dict(req.verbose) for e in estimates],
                "theorem": verdicts,
                "ok": all(v["ok"] for v in verdicts),
            }

        return _report("estimate", req, req.seed, worker)

    @app.post("/api/counterexample")
    def counterexample(req: models.CounterexampleRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            config = ExperimentConfig(
                n_grid=(req.n,), replicates=req.replicates, base_seed=req.seed
            )
            out = counterexample_experiment(F, config, threads=req.threads)
            return {
                "mu_estimate": out["mu_estimate"].as_dict(verbose=True),
                "upper_bound": out["upper_bound"],
                "e_min4": out["e_min4"],
                "separated": out["separated"],
                "theorem": out["theorem"],
                "replicates_above_upper": out["replicates_above_upper"],
                "ok": out["separated"],
            }

        return _report("counterexample", req, req.seed, worker)

    @app.post("/api/median-suite")
    def median(req: models.MedianSuiteRequest) -> dict:
        def worker() -> dict:
            config = ExperimentConfig(
                n_grid=(req.n,), replicates=req.replicates, base_seed=req.seed
            )
            out = median_suite(req.k_grid, config, threads=req.threads)

            def rows(family: dict) -> list[dict]:
                return [{"k": r["k"], **r["estimate"].as_dict()} for r in family["rows"]]

            return {
                "n": out["n"],
                "family_A": {
                    "formula": out["family_A"]["formula"],
                    "rows": rows(out["family_A"]),
                    "nonincreasing": out["family_A"]["nonincreasing"],
                    "last_below_half_of_first": out["family_A"]["last_below_half_of_first"],
                },
                "family_B": {
                    "formula": out["family_B"]["formula"],
                    "rows": rows(out["family_B"]),
                    "trend_only": True,
                },
                "ok": out["family_A"]["nonincreasing"]
                and out["family_A"]["last_below_half_of_first"],
            }

        return _report("median-suite", req, req.seed, worker)

    @app.post("/api/saw/count")
    def saw_count(req: models.SawCountRequest) -> dict:
        return _report("saw-count", req, 0, lambda: {"n": req.n, "c_n": saw.count_saws(req.n)})

    @app.post("/api/saw/census")
    def saw_census(req: models.SawCensusRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            field = make_field(saw.census_box(req.n), F, req.seed)
            c = saw.census(field, req.n, req.delta, req.threshold)
            return {
                "n": c.n,
                "total_walks": c.total_walks,
                "delta": c.delta,
                "threshold_weight": c.threshold_weight,
                "cutoff": saw.strict_count_cutoff(req.n, req.delta),
                "N_n": c.N_n,
                "heavy_histogram": {str(k): v for k, v in sorted(c.heavy_histogram.items())},
            }

        return _report("saw-census", req, req.seed, worker)

    @app.post("/api/saw/bound")
    def saw_bound(req: models.SawBoundRequest) -> dict:
        return _report(
            "saw-bound",
            req,
            0,
            lambda: dict(saw.expected_Nn_bound(req.n, req.p, req.delta, req.beta)),
        )

    @app.post("/api/saw/witness")
    def saw_witness(req: models.SawWitnessRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            field = make_field(saw.witness_box(req.n), F, req.seed)
            return saw.lower_bound_witness(field, req.n, req.delta, req.threshold)

        return _report("saw-witness", req, req.seed, worker)

    @app.post("/api/opc/survival")
    def opc_survival(req: models.OpcSurvivalRequest) -> dict:
        return _report(
            "opc-survival",
            req,
            req.seed,
            lambda: opercolation.survival_probability(
                req.p, req.depth, req.trials, req.seed
            ).as_dict(),
        )

    @app.post("/api/opc/scan")
    def opc_scan(req: models.OpcScanRequest) -> dict:
        def worker() -> dict:
            table = opercolation.pc_scan(req.p_grid, req.depth, req.trials, req.seed)
            return {
                "variant": opercolation.ORIENTED_VARIANT,
                "level": req.level,
                "rows": [e.as_dict() for e in table],
                "crossing": opercolation.crossing_estimate(table, req.level),
            }

        return _report("opc-scan", req, req.seed, worker)

    @app.post("/api/opc/probe")
    def opc_probe(req: models.OpcProbeRequest) -> dict:
        def worker() -> dict:
            F = _parse_dist(req.dist)
            return opercolation.flat_edge_probe(F, req.n, req.M_grid, req.trials, req.seed)

        return _report("opc-probe", req, req.seed, worker)

    @app.post("/api/selftest")
    def selftest() -> dict:
        class _Empty(BaseModel):
            pass

        return _report("selftest", _Empty(), 0, run_selftest)

    return app
