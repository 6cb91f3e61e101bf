"""Service operations behind the HTTP routes.

Each handler is a pure function of its request model (plus a thread
count that only affects speed), so the CLI can call them in process and
get byte-identical results to a round trip through the server.

Seed scheme per request: the master ``seed`` feeds the permutation and
tie-break streams directly (their purpose tags differ), while region
sign blocks use ``derive_seed(seed, "sps", k)`` with ``k`` in 0..3 for
the first and second system's sign and tie streams respectively.
"""

from __future__ import annotations

import time

import numpy as np

from .. import __version__
from ..config import ConfigError
from ..depmeasure import PairedSample
from ..experiments import run_power_curve, simulate_pair
from ..ranktest import iid_independence_test
from ..robusttest import SystemPair, residual_pair, run_robust_test
from ..selftest import run_selftest
from ..spsconf import SpsConfig, sps_region
from .. import rng
from . import schemas as sm


def handle_simulate(req: sm.SimulateRequest, threads: int = 1) -> sm.SimulateResponse:
    t0 = time.perf_counter()
    pair = simulate_pair(
        req.systems.y.setup("y"),
        req.systems.z.setup("z"),
        req.generator.build(),
        req.n,
        req.seed,
        input_kind=req.input.kind,
        input_scale=req.input.scale,
    )
    return sm.SimulateResponse(
        y=sm.SeriesPairModel(input=pair.u.tolist(), output=pair.y.tolist()),
        z=sm.SeriesPairModel(input=pair.v.tolist(), output=pair.z.tolist()),
        seed=req.seed,
        elapsed_seconds=time.perf_counter() - t0,
    )


def _sample_from_request(req: sm.IidTestRequest) -> PairedSample:
    if req.sample is not None:
        return PairedSample(e=np.asarray(req.sample.e), n=np.asarray(req.sample.n))
    pair = SystemPair(
        structure_y=req.systems.y.build_structure(),
        structure_z=req.systems.z.build_structure(),
        u=np.asarray(req.data.y.input),
        y=np.asarray(req.data.y.output),
        v=np.asarray(req.data.z.input),
        z=np.asarray(req.data.z.output),
    )
    if req.systems.y.params is None or req.systems.z.params is None:
        raise ConfigError("systems.y.params and systems.z.params are required for test-iid")
    return residual_pair(pair, req.systems.y.params, req.systems.z.params)


def handle_test_iid(req: sm.IidTestRequest, threads: int = 1) -> sm.TestResponse:
    sample = _sample_from_request(req)
    cfg = req.rank.build(perm_seed=req.seed, tie_seed=req.seed)
    report = iid_independence_test(sample, req.estimator.build(), cfg)
    return sm.TestResponse(
        report=report.to_dict(),
        reject=report.reject,
        elapsed_seconds=report.elapsed_seconds,
    )


def handle_test_robust(req: sm.RobustTestRequest, threads: int = 1) -> sm.TestResponse:
    pair = SystemPair(
        structure_y=req.systems.y.build_structure(),
        structure_z=req.systems.z.build_structure(),
        u=np.asarray(req.data.y.input),
        y=np.asarray(req.data.y.output),
        v=np.asarray(req.data.z.input),
        z=np.asarray(req.data.z.output),
    )
    plan = req.robust.plan(req.estimator.build())
    report = run_robust_test(pair, plan.robust_config(req.seed))
    return sm.TestResponse(
        report=report.to_dict(),
        reject=report.reject,
        elapsed_seconds=report.elapsed_seconds,
    )


def handle_sps_region(req: sm.SpsRegionRequest, threads: int = 1) -> sm.SpsRegionResponse:
    t0 = time.perf_counter()
    base = 0 if req.system == "y" else 2
    cfg = SpsConfig(
        variants=req.sps.variants,
        q=req.sps.q,
        sign_seed=rng.derive_seed(req.seed, "sps", base),
        tie_seed=rng.derive_seed(req.seed, "sps", base + 1),
    )
    region = sps_region(
        req.structure.build(),
        np.asarray(req.data.input),
        np.asarray(req.data.output),
        [ax.build() for ax in req.grid],
        cfg,
    )
    return sm.SpsRegionResponse(
        region=region.to_dict(), elapsed_seconds=time.perf_counter() - t0
    )


def handle_power_curve(req: sm.PowerCurveRequest, threads: int = 1) -> sm.PowerCurveResponse:
    t0 = time.perf_counter()
    curve = run_power_curve(
        plan=_power_plan(req),
        setup_y=req.systems.y.setup("y"),
        setup_z=req.systems.z.setup("z"),
        generator=req.generator.build(),
        n=req.n,
        sweep_variable=req.monte_carlo.sweep.variable,
        sweep_values=req.monte_carlo.sweep.values,
        trials=req.monte_carlo.trials,
        seed=req.seed,
        threads=threads,
        input_kind=req.input.kind,
        input_scale=req.input.scale,
    )
    return sm.PowerCurveResponse(curve=curve.to_dict(), elapsed_seconds=time.perf_counter() - t0)


def _power_plan(req: sm.PowerCurveRequest):
    from ..experiments import IidTestPlan

    estimator = req.test.estimator.build()
    if req.test.mode == "iid":
        cfg = req.test.rank.build(0, 0)
        return IidTestPlan(estimator=estimator, m=cfg.m, r=cfg.r, p=cfg.p)
    return req.test.robust.plan(estimator)


def handle_selftest(threads: int = 1) -> sm.SelftestResponse:
    checks = run_selftest()
    return sm.SelftestResponse(passed=all(c["passed"] for c in checks), checks=checks)


def version() -> str:
    return __version__
