"""Monte Carlo drivers: simulated system pairs, rejection rates, power curves.

Trials are pure functions of a per-trial seed derived as
``derive_seed(master_seed, "trial", sweep_index, trial_index)``, so any
worker count reproduces the same outcomes in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import rng
from .depmeasure import DependenceEstimator, PairedSample
from .generators import (
    ExtinctGaussian,
    InnovationGenerator,
    RotatedMixture,
    draw,
)
from .linsys import ArxStructure, simulate
from .ranktest import RankConfig, iid_independence_test
from .robusttest import RobustConfig, SystemPair, run_robust_test
from .spsconf import SpsConfig


@dataclass(frozen=True)
class SystemSetup:
    """A model structure together with its true parameter vector."""

    structure: ArxStructure
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        p = tuple(float(x) for x in np.atleast_1d(np.asarray(self.params, dtype=np.float64)))
        if len(p) != self.structure.n_params:
            raise ValueError(f"expected {self.structure.n_params} parameters, got {len(p)}")
        object.__setattr__(self, "params", p)


def ar1_setup(coefficient: float) -> SystemSetup:
    return SystemSetup(structure=ArxStructure(na=1), params=(coefficient,))


def _input_series(kind: str, scale: float, n: int, seed: int, tag: str) -> np.ndarray:
    if kind == "zeros":
        return np.zeros(n)
    if kind == "gaussian":
        return rng.stream(seed, tag).normal(0.0, scale, size=n)
    raise ValueError(f"unknown input kind {kind!r}")


def simulate_pair(
    setup_y: SystemSetup,
    setup_z: SystemSetup,
    generator: InnovationGenerator,
    n: int,
    seed: int,
    input_kind: str = "zeros",
    input_scale: float = 1.0,
) -> SystemPair:
    """Draw innovations, generate inputs and drive both systems."""
    innov = draw(generator, n, seed)
    u = _input_series(input_kind, input_scale, n, seed, "input-u")
    v = _input_series(input_kind, input_scale, n, seed, "input-v")
    y = simulate(setup_y.structure.model(setup_y.params), u, innov.e)
    z = simulate(setup_z.structure.model(setup_z.params), v, innov.n)
    return SystemPair(
        structure_y=setup_y.structure,
        structure_z=setup_z.structure,
        u=u,
        y=y,
        v=v,
        z=z,
    )


def known_parameter_sample(pair: SystemPair, setup_y: SystemSetup, setup_z: SystemSetup) -> PairedSample:
    """Residual pair at the true parameters (the known-parameter test input)."""
    from .robusttest import residual_pair

    return residual_pair(pair, setup_y.params, setup_z.params)


def parallel_map(fn: Callable[[int], object], count: int, threads: int = 1) -> list:
    """Deterministic indexed map; ``threads`` affects speed only."""
    if threads > 1:
        from joblib import Parallel, delayed

        return Parallel(n_jobs=threads)(delayed(fn)(i) for i in range(count))
    return [fn(i) for i in range(count)]


@dataclass(frozen=True)
class IidTestPlan:
    """Known-parameter test bundle for Monte Carlo runs."""

    estimator: DependenceEstimator
    m: int = 40
    r: int = 6
    p: int | None = None


@dataclass(frozen=True)
class RobustTestPlan:
    """Unknown-parameter test bundle for Monte Carlo runs."""

    estimator: DependenceEstimator
    alpha: float | str = "0.15"
    m: int = 40
    r: int = 5
    variants: int = 80
    q: int = 1
    grid_y: tuple | None = None
    grid_z: tuple | None = None

    def __post_init__(self) -> None:
        from .spsconf import stability_axis

        if self.grid_y is None:
            object.__setattr__(self, "grid_y", (stability_axis(),))
        if self.grid_z is None:
            object.__setattr__(self, "grid_z", (stability_axis(),))

    def robust_config(self, trial_seed: int) -> RobustConfig:
        return RobustConfig(
            alpha=self.alpha,
            m=self.m,
            r=self.r,
            sps_y=SpsConfig(
                variants=self.variants,
                q=self.q,
                sign_seed=rng.derive_seed(trial_seed, "sps", 0),
                tie_seed=rng.derive_seed(trial_seed, "sps", 1),
            ),
            sps_z=SpsConfig(
                variants=self.variants,
                q=self.q,
                sign_seed=rng.derive_seed(trial_seed, "sps", 2),
                tie_seed=rng.derive_seed(trial_seed, "sps", 3),
            ),
            grid_y=self.grid_y,
            grid_z=self.grid_z,
            estimator=self.estimator,
            perm_seed=trial_seed,
            tie_seed=trial_seed,
        )


TestPlan = IidTestPlan | RobustTestPlan


def run_trial(
    plan: TestPlan,
    setup_y: SystemSetup,
    setup_z: SystemSetup,
    generator: InnovationGenerator,
    n: int,
    trial_seed: int,
    input_kind: str = "zeros",
    input_scale: float = 1.0,
) -> bool:
    """One simulate-then-test trial; returns the rejection indicator."""
    pair = simulate_pair(setup_y, setup_z, generator, n, trial_seed, input_kind, input_scale)
    if isinstance(plan, IidTestPlan):
        sample = known_parameter_sample(pair, setup_y, setup_z)
        cfg = RankConfig(
            m=plan.m, r=plan.r, p=plan.p, perm_seed=trial_seed, tie_seed=trial_seed
        )
        return iid_independence_test(sample, plan.estimator, cfg).reject
    report = run_robust_test(pair, plan.robust_config(trial_seed))
    return report.reject


def _with_sweep_value(
    generator: InnovationGenerator, variable: str, value: float, n: int
) -> tuple[InnovationGenerator, int]:
    if variable == "n":
        return generator, int(value)
    if variable == "angle":
        if not isinstance(generator, RotatedMixture):
            raise ValueError("an angle sweep needs a rotated-mixture generator")
        return replace(generator, angle=float(value)), n
    if variable == "radius":
        if not isinstance(generator, ExtinctGaussian):
            raise ValueError("a radius sweep needs an extinct-Gaussian generator")
        return replace(generator, radius=float(value)), n
    raise ValueError(f"unknown sweep variable {variable!r}")


@dataclass(frozen=True)
class PowerCurve:
    """Rejection frequencies along a sweep with binomial error bars."""

    sweep_variable: str
    sweep_values: tuple[float, ...]
    power: tuple[float, ...]
    ci_halfwidth: tuple[float, ...]
    trials: int
    seed: int
    metadata: dict

    def rows(self) -> list[tuple]:
        return [
            (v, p, h, self.trials, self.seed)
            for v, p, h in zip(self.sweep_values, self.power, self.ci_halfwidth)
        ]

    def to_dict(self) -> dict:
        return {
            "sweep_variable": self.sweep_variable,
            "sweep": [float(v) for v in self.sweep_values],
            "power": [float(p) for p in self.power],
            "ci_halfwidth": [float(h) for h in self.ci_halfwidth],
            "trials": int(self.trials),
            "seed": int(self.seed),
            "metadata": self.metadata,
        }


def run_power_curve(
    plan: TestPlan,
    setup_y: SystemSetup,
    setup_z: SystemSetup,
    generator: InnovationGenerator,
    n: int,
    sweep_variable: str,
    sweep_values,
    trials: int,
    seed: int,
    threads: int = 1,
    input_kind: str = "zeros",
    input_scale: float = 1.0,
) -> PowerCurve:
    """Rejection frequency per sweep value over ``trials`` seeded trials."""
    values = [float(v) for v in sweep_values]
    if trials < 1:
        raise ValueError("trial count must be at least 1")
    if sorted(values) != values:
        raise ValueError("sweep values must be sorted in increasing order")
    power: list[float] = []
    halfwidth: list[float] = []
    for s_ix, value in enumerate(values):
        gen_v, n_v = _with_sweep_value(generator, sweep_variable, value, n)

        def trial(t_ix: int, s_ix: int = s_ix, gen_v=gen_v, n_v=n_v) -> bool:
            return run_trial(
                plan,
                setup_y,
                setup_z,
                gen_v,
                n_v,
                rng.derive_seed(seed, "trial", s_ix, t_ix),
                input_kind,
                input_scale,
            )

        rejects = parallel_map(trial, trials, threads)
        freq = float(np.mean(rejects))
        power.append(freq)
        halfwidth.append(float(1.96 * np.sqrt(freq * (1.0 - freq) / trials)))
    mode = "iid" if isinstance(plan, IidTestPlan) else "robust"
    return PowerCurve(
        sweep_variable=sweep_variable,
        sweep_values=tuple(values),
        power=tuple(power),
        ci_halfwidth=tuple(halfwidth),
        trials=trials,
        seed=int(seed),
        metadata={"mode": mode, "n": int(n)},
    )
