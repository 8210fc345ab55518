"""Pydantic request/response models for the spreadlab service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..deposition import DepositionMechanism, NonUniform, Uniform


class MechanismSpec(BaseModel):
    kind: Literal["uniform", "nonuniform"] = "uniform"
    alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _alpha_required(self):
        if self.kind == "nonuniform" and self.alpha is None:
            raise ValueError("nonuniform mechanism requires alpha")
        return self

    def to_mechanism(self) -> DepositionMechanism:
        if self.kind == "uniform":
            return Uniform()
        return NonUniform(self.alpha)


class ParityTableOut(BaseModel):
    s: int
    parity: Literal["odd", "even"]
    p_odd: float
    p_odd_given_odd: float
    p_even_given_odd: float
    p_odd_given_even: float
    p_even_given_even: float


class ScalarOut(BaseModel):
    value: float


class SimulateRequest(BaseModel):
    pi: float = Field(default=1.0 / 3.0, gt=0.0, lt=1.0)
    k: float = Field(default=2.0, gt=1.0)
    mechanism: MechanismSpec = Field(default_factory=MechanismSpec)
    cancel_rate: float = Field(default=1e-2, ge=0.0, lt=1.0)
    steps: int = Field(default=100_000, ge=1)
    warmup: int = Field(default=10_000, ge=0)
    seed: int = 0
    window: int = Field(default=10_000, ge=64)
    initial_depth: int = Field(default=10, ge=1)
    spread_ceiling: Optional[int] = None
    include_trajectory: bool = True
    include_quote_tape: bool = False
    include_events: bool = False
    tape_tick_size: float = Field(default=0.01, gt=0.0)


class SimSummary(BaseModel):
    steps_executed: int
    n_records: int
    diverged: bool
    stalled: bool
    mean_spread: float
    max_spread: int
    odd_spread_fraction: float
    spread_up_events: int
    spread_down_events: int
    cancel_at_best: int
    cancel_at_best_rate: float
    side_flips: int
    market_skips: int
    dropped_units: int


class SimulateResponse(BaseModel):
    summary: SimSummary
    config: dict
    trajectory_csv: Optional[str] = None
    quote_tape_csv: Optional[str] = None
    events_csv: Optional[str] = None


class SweepRequest(BaseModel):
    means: list[float] = Field(min_length=1)
    mechanisms: list[MechanismSpec] = Field(min_length=1)
    n_samples: int = Field(default=1_000_000, ge=1)
    seed: int = 0
    spread_dist: Literal["geometric", "poisson"] = "geometric"
    threads: int = Field(default=1, ge=1, le=64)


class SweepRowOut(BaseModel):
    mean_spread: float
    mechanism: str
    alpha: Optional[float]
    odd_fraction: float
    n_transitions: int


class SweepResponse(BaseModel):
    rows: list[SweepRowOut]
    csv: str
    config: dict


ESTIMATOR_NAMES = (
    "odd_fraction",
    "conditional_parity",
    "delta_s",
    "alpha",
    "acf",
    "relaxation",
)


class AnalyzeRequest(BaseModel):
    events_csv: str
    estimators: list[str] = Field(default_factory=lambda: ["all"])
    min_count: int = Field(default=50, ge=1)
    delta_s_spread: Optional[int] = Field(default=None, ge=2)
    relax_delta: int = 2
    relax_max_lag: int = Field(default=1000, ge=0)
    acf_max_lag: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def _known_estimators(self):
        for name in self.estimators:
            if name != "all" and name not in ESTIMATOR_NAMES:
                raise ValueError(
                    f"unknown estimator {name!r}; choose from {ESTIMATOR_NAMES} or 'all'"
                )
        return self

    def selected(self) -> list[str]:
        if "all" in self.estimators:
            return list(ESTIMATOR_NAMES)
        return list(dict.fromkeys(self.estimators))


class AnalyzeResponse(BaseModel):
    outputs: dict[str, str]
    notes: list[str]
    config: dict


class IngestRequest(BaseModel):
    quotes_csv: str
    tick_size: float = Field(gt=0.0)
    tolerance: float = Field(default=1e-6, ge=0.0)
    strict: bool = True


class IngestResponse(BaseModel):
    events_csv: str
    metadata: dict
    config: dict


class HealthResponse(BaseModel):
    status: str
    version: str
