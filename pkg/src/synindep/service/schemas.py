"""Request and response models of the HTTP service.

Requests carry data inline (JSON arrays); the sub-models for systems,
estimators, grids and sweeps are shared with the file-config schema so
the CLI can lift a config document straight into a request.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import (
    EstimatorSpec,
    GeneratorSpec,
    GridAxisSpec,
    InputSpec,
    MonteCarloSpec,
    RankSpec,
    RobustSpec,
    SpsSpec,
    StructureSpec,
    SystemsSpec,
    TestSpec,
)

__all__ = [
    "EstimatorSpec",
    "GeneratorSpec",
    "GridAxisSpec",
    "InputSpec",
    "MonteCarloSpec",
    "RankSpec",
    "RobustSpec",
    "SpsSpec",
    "StructureSpec",
    "SystemsSpec",
    "TestSpec",
    "SeriesPairModel",
    "TwoSystemData",
    "SampleModel",
    "SimulateRequest",
    "SimulateResponse",
    "IidTestRequest",
    "TestResponse",
    "RobustTestRequest",
    "SpsRegionRequest",
    "SpsRegionResponse",
    "PowerCurveRequest",
    "PowerCurveResponse",
    "SelftestResponse",
    "HealthResponse",
]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SeriesPairModel(_Model):
    input: list[float]
    output: list[float]

    @model_validator(mode="after")
    def _lengths(self) -> "SeriesPairModel":
        if len(self.input) != len(self.output):
            raise ValueError("input and output series must have equal length")
        return self


class TwoSystemData(_Model):
    y: SeriesPairModel
    z: SeriesPairModel


class SampleModel(_Model):
    e: list[float]
    n: list[float]


class SimulateRequest(_Model):
    systems: SystemsSpec
    generator: GeneratorSpec
    input: InputSpec = Field(default_factory=InputSpec)
    n: int
    seed: int = 0


class SimulateResponse(_Model):
    y: SeriesPairModel
    z: SeriesPairModel
    seed: int
    elapsed_seconds: float


class IidTestRequest(_Model):
    """Known-parameter test: either raw residual pairs or systems plus data."""

    systems: SystemsSpec | None = None
    data: TwoSystemData | None = None
    sample: SampleModel | None = None
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    rank: RankSpec = Field(default_factory=lambda: RankSpec(r=6))
    seed: int = 0

    @model_validator(mode="after")
    def _one_source(self) -> "IidTestRequest":
        from_systems = self.systems is not None and self.data is not None
        if from_systems == (self.sample is not None):
            raise ValueError("provide either sample or both systems and data")
        return self


class TestResponse(_Model):
    report: dict
    reject: bool
    elapsed_seconds: float


class RobustTestRequest(_Model):
    systems: SystemsSpec
    data: TwoSystemData
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    robust: RobustSpec = Field(default_factory=RobustSpec)
    seed: int = 0


class SpsRegionRequest(_Model):
    structure: StructureSpec
    data: SeriesPairModel
    grid: list[GridAxisSpec] = Field(default_factory=lambda: [GridAxisSpec()])
    sps: SpsSpec = Field(default_factory=SpsSpec)
    system: Literal["y", "z"] = "y"
    seed: int = 0


class SpsRegionResponse(_Model):
    region: dict
    elapsed_seconds: float


class PowerCurveRequest(_Model):
    systems: SystemsSpec
    generator: GeneratorSpec
    input: InputSpec = Field(default_factory=InputSpec)
    n: int
    test: TestSpec = Field(default_factory=TestSpec)
    monte_carlo: MonteCarloSpec
    seed: int = 0


class PowerCurveResponse(_Model):
    curve: dict
    elapsed_seconds: float


class SelftestResponse(_Model):
    passed: bool
    checks: list[dict]


class HealthResponse(_Model):
    status: str
    version: str
