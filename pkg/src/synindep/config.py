"""Versioned configuration schema shared by the CLI and the service.

One JSON document (``schema_version: 1``) describes systems, data file
locations, the innovation generator, test settings and Monte Carlo
sweeps.  Each subcommand reads the sections it needs; missing or
misspelled keys fail validation with the offending key named.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .depmeasure import (
    DependenceEstimator,
    DistanceCovariance,
    GaussianKernel,
    Hsic,
    Kernel,
    LinearKernel,
)
from .experiments import IidTestPlan, RobustTestPlan, SystemSetup
from .generators import (
    CustomSampler,
    ExtinctGaussian,
    IndependentGaussian,
    InnovationGenerator,
    RotatedMixture,
)
from .linsys import ArxStructure
from .ranktest import RankConfig


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending keys."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class StructureSpec(_Model):
    type: Literal["arx"] = "arx"
    na: int = 1
    nb: int = 0
    delay: int = 1

    def build(self) -> ArxStructure:
        return ArxStructure(na=self.na, nb=self.nb, delay=self.delay)


class SystemSpec(_Model):
    structure: StructureSpec = Field(default_factory=StructureSpec)
    params: list[float] | None = None

    def setup(self, name: str) -> SystemSetup:
        if self.params is None:
            raise ConfigError(f"systems.{name}.params is required for this command")
        return SystemSetup(structure=self.build_structure(), params=tuple(self.params))

    def build_structure(self) -> ArxStructure:
        return self.structure.build()


class SystemsSpec(_Model):
    y: SystemSpec = Field(default_factory=SystemSpec)
    z: SystemSpec = Field(default_factory=SystemSpec)


class KernelSpec(_Model):
    kind: Literal["gaussian", "linear"] = "gaussian"
    bandwidth: float | Literal["median"] = "median"

    def build(self) -> Kernel:
        if self.kind == "linear":
            return LinearKernel()
        return GaussianKernel(bandwidth=self.bandwidth)


class EstimatorSpec(_Model):
    kind: Literal["hsic", "dcov"] = "hsic"
    kernel_e: KernelSpec = Field(default_factory=KernelSpec)
    kernel_n: KernelSpec = Field(default_factory=KernelSpec)

    def build(self) -> DependenceEstimator:
        if self.kind == "dcov":
            return DistanceCovariance()
        return Hsic(kernel_e=self.kernel_e.build(), kernel_n=self.kernel_n.build())


class RankSpec(_Model):
    m: int = 40
    r: int | None = None
    p: int | None = None
    alpha: float | None = None

    @model_validator(mode="after")
    def _one_threshold(self) -> "RankSpec":
        if (self.r is None) == (self.alpha is None):
            raise ValueError("specify exactly one of test.rank.r and test.rank.alpha")
        return self

    def build(self, perm_seed: int, tie_seed: int) -> RankConfig:
        if self.alpha is not None:
            return RankConfig.from_level(self.alpha, self.m, perm_seed=perm_seed, tie_seed=tie_seed)
        return RankConfig(m=self.m, r=self.r, p=self.p, perm_seed=perm_seed, tie_seed=tie_seed)


class SpsSpec(_Model):
    variants: int = 80
    q: int = 1


class GridAxisSpec(_Model):
    lo: float = -0.95
    hi: float = 0.95
    points: int = 41

    @model_validator(mode="after")
    def _ordered(self) -> "GridAxisSpec":
        if self.points < 1:
            raise ValueError("grid axis needs at least one point")
        if not self.lo <= self.hi:
            raise ValueError("grid axis needs lo <= hi")
        return self

    def build(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


class RobustSpec(_Model):
    alpha: float = 0.15
    m: int = 40
    r: int | None = None
    sps: SpsSpec = Field(default_factory=SpsSpec)
    grid_y: list[GridAxisSpec] = Field(default_factory=lambda: [GridAxisSpec()])
    grid_z: list[GridAxisSpec] = Field(default_factory=lambda: [GridAxisSpec()])

    def plan(self, estimator: DependenceEstimator) -> RobustTestPlan:
        from fractions import Fraction

        from .robusttest import RobustConfig

        r = self.r
        if r is None:
            r = RobustConfig.max_threshold(
                str(self.alpha), self.m, Fraction(self.sps.q, self.sps.variants)
            )
        return RobustTestPlan(
            estimator=estimator,
            alpha=str(self.alpha),
            m=self.m,
            r=r,
            variants=self.sps.variants,
            q=self.sps.q,
            grid_y=tuple(ax.build() for ax in self.grid_y),
            grid_z=tuple(ax.build() for ax in self.grid_z),
        )


class GeneratorSpec(_Model):
    kind: Literal["independent_gaussian", "rotated_mixture", "extinct_gaussian", "custom"] = (
        "independent_gaussian"
    )
    cov_scale: float = 0.25
    angle: float = 0.0
    shift: float = 1.0
    radius: float = 0.0
    sampler: str = "gaussian"
    scale: float = 0.5

    def build(self) -> InnovationGenerator:
        if self.kind == "independent_gaussian":
            return IndependentGaussian(cov_scale=self.cov_scale)
        if self.kind == "rotated_mixture":
            return RotatedMixture(angle=self.angle, shift=self.shift, cov_scale=self.cov_scale)
        if self.kind == "extinct_gaussian":
            return ExtinctGaussian(radius=self.radius, cov_scale=self.cov_scale)
        return CustomSampler(name=self.sampler, scale=self.scale)


class InputSpec(_Model):
    kind: Literal["zeros", "gaussian"] = "zeros"
    scale: float = 1.0


class TestSpec(_Model):
    mode: Literal["iid", "robust"] = "iid"
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    rank: RankSpec = Field(default_factory=lambda: RankSpec(r=6))
    robust: RobustSpec = Field(default_factory=RobustSpec)


class SweepSpec(_Model):
    variable: Literal["angle", "radius", "n"]
    values: list[float]

    @model_validator(mode="after")
    def _sorted(self) -> "SweepSpec":
        if not self.values:
            raise ValueError("sweep.values must be non-empty")
        if sorted(self.values) != self.values:
            raise ValueError("sweep.values must be sorted in increasing order")
        return self


class MonteCarloSpec(_Model):
    trials: int = 200
    sweep: SweepSpec

    @model_validator(mode="after")
    def _positive(self) -> "MonteCarloSpec":
        if self.trials < 1:
            raise ValueError("monte_carlo.trials must be at least 1")
        return self


class DataSpec(_Model):
    y: str
    z: str


class ExperimentConfig(_Model):
    schema_version: Literal[1]
    systems: SystemsSpec = Field(default_factory=SystemsSpec)
    data: DataSpec | None = None
    generator: GeneratorSpec | None = None
    input: InputSpec = Field(default_factory=InputSpec)
    n: int | None = None
    test: TestSpec = Field(default_factory=TestSpec)
    monte_carlo: MonteCarloSpec | None = None
    seed: int = 0

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"config key {name!r} is required for this command")

    def plan(self) -> IidTestPlan | RobustTestPlan:
        estimator = self.test.estimator.build()
        if self.test.mode == "iid":
            rank = self.test.rank
            cfg = rank.build(0, 0)
            return IidTestPlan(estimator=estimator, m=cfg.m, r=cfg.r, p=cfg.p)
        return self.test.robust.plan(estimator)


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    import json

    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p} is not valid JSON: {exc}") from None
    return parse_config(doc)


def resolve_data_path(config_path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else Path(config_path).parent / p
