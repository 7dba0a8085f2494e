"""Request models for the HTTP API.

Each model mirrors one endpoint.  Distributions travel as the same
mixture document the CLI accepts (a dict, or a JSON string holding one);
parsing happens in the endpoint so a malformed mixture reports as a 422
with the parser's message rather than a generic type error.
"""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field

DistDoc = Union[str, dict]

_CE_DOC: dict = {"mix": [{"w": 2 / 3, "point": 1.0}, {"w": 1 / 3, "point": 3888.0}]}


class BoundsRequest(BaseModel):
    dist: DistDoc
    d: Optional[int] = Field(default=None, ge=2, description="lattice dimension for the d-dimensional variant")
    pc_d: Optional[float] = Field(default=None, gt=0.0, lt=1.0)


class EstimateRequest(BaseModel):
    dist: DistDoc
    n_grid: list[int] = Field(default=[200], min_length=1)
    replicates: int = Field(default=20, ge=1)
    margin_factor: float = Field(default=0.25, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: Optional[int] = Field(default=None, ge=1)
    verbose: bool = False


class CounterexampleRequest(BaseModel):
    dist: DistDoc = Field(default_factory=lambda: dict(_CE_DOC))
    n: int = Field(default=200, ge=2)
    replicates: int = Field(default=30, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: Optional[int] = Field(default=None, ge=1)


class MedianSuiteRequest(BaseModel):
    k_grid: list[int] = Field(default=[1, 10, 100], min_length=1)
    n: int = Field(default=100, ge=2)
    replicates: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: Optional[int] = Field(default=None, ge=1)


class SawCountRequest(BaseModel):
    n: int = Field(ge=1)


class SawCensusRequest(BaseModel):
    dist: DistDoc
    n: int = Field(default=8, ge=1)
    delta: float = Field(default=0.01, gt=0.0, le=1.0)
    threshold: float
    seed: int = Field(default=0, ge=0, lt=2**64)


class SawBoundRequest(BaseModel):
    n: int = Field(default=200, ge=1)
    p: float = Field(default=2 / 3, ge=2 / 3, le=1.0)
    delta: float = Field(default=0.01, gt=0.0, le=1.0)
    beta: float = Field(default=5.0, gt=0.0)


class SawWitnessRequest(BaseModel):
    dist: DistDoc
    n: int = Field(default=12, ge=1)
    delta: float = Field(default=0.01, gt=0.0, le=1.0)
    threshold: float
    seed: int = Field(default=0, ge=0, lt=2**64)


class OpcSurvivalRequest(BaseModel):
    p: float = Field(ge=0.0, le=1.0)
    depth: int = Field(default=200, ge=1)
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


class OpcScanRequest(BaseModel):
    p_grid: list[float] = Field(min_length=1)
    depth: int = Field(default=200, ge=1)
    trials: int = Field(default=1000, ge=1)
    level: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class OpcProbeRequest(BaseModel):
    dist: DistDoc = Field(default_factory=lambda: dict(_CE_DOC))
    n: int = Field(default=200, ge=2)
    M_grid: list[float] = Field(min_length=1)
    trials: int = Field(default=400, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
