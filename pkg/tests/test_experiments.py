import numpy as np
import numpy.testing as npt
import pytest

from synindep.depmeasure import GaussianKernel, Hsic
from synindep.experiments import (
    IidTestPlan,
    RobustTestPlan,
    SystemSetup,
    ar1_setup,
    known_parameter_sample,
    parallel_map,
    run_power_curve,
    run_trial,
    simulate_pair,
)
from synindep.generators import IndependentGaussian, RotatedMixture, draw
from synindep.linsys import ArxStructure
from synindep.rng import derive_seed

HSIC = Hsic(GaussianKernel("median"), GaussianKernel("median"))
SETUP_Y = ar1_setup(0.5)
SETUP_Z = ar1_setup(0.3)


def test_system_setup_checks_parameter_count():
    with pytest.raises(ValueError):
        SystemSetup(structure=ArxStructure(na=2), params=(0.5,))


def test_simulate_pair_uses_the_drawn_innovations():
    gen = IndependentGaussian()
    pair = simulate_pair(SETUP_Y, SETUP_Z, gen, n=100, seed=7)
    innov = draw(gen, 100, 7)
    sample = known_parameter_sample(pair, SETUP_Y, SETUP_Z)
    npt.assert_allclose(sample.e, innov.e, atol=1e-10)
    npt.assert_allclose(sample.n, innov.n, atol=1e-10)
    npt.assert_array_equal(pair.u, np.zeros(100))


def test_simulate_pair_gaussian_inputs_differ_between_systems():
    pair = simulate_pair(
        SETUP_Y, SETUP_Z, IndependentGaussian(), n=50, seed=3,
        input_kind="gaussian", input_scale=2.0,
    )
    assert not np.array_equal(pair.u, pair.v)
    assert pair.u.std() > 1.0


def test_unknown_input_kind_raises():
    with pytest.raises(ValueError):
        simulate_pair(SETUP_Y, SETUP_Z, IndependentGaussian(), 10, 0, input_kind="ramp")


def test_run_trial_is_a_pure_function_of_its_seed():
    plan = IidTestPlan(estimator=HSIC, m=20, r=3)
    gen = RotatedMixture(angle=0.2)
    a = [run_trial(plan, SETUP_Y, SETUP_Z, gen, 60, trial_seed=s) for s in range(30)]
    b = [run_trial(plan, SETUP_Y, SETUP_Z, gen, 60, trial_seed=s) for s in range(30)]
    assert a == b
    assert any(a) and not all(a)


def test_parallel_map_is_ordered_and_thread_invariant():
    fn = lambda i: i * i
    assert parallel_map(fn, 6) == [0, 1, 4, 9, 16, 25]
    assert parallel_map(fn, 6, threads=2) == [0, 1, 4, 9, 16, 25]


def test_robust_plan_defaults_and_seed_derivation():
    plan = RobustTestPlan(estimator=HSIC)
    assert plan.m == 40 and plan.r == 5 and plan.variants == 80 and plan.q == 1
    assert len(plan.grid_y) == 1 and plan.grid_y[0].size == 41
    cfg = plan.robust_config(trial_seed=77)
    assert cfg.perm_seed == 77 and cfg.tie_seed == 77
    assert cfg.sps_y.sign_seed == derive_seed(77, "sps", 0)
    assert cfg.sps_z.sign_seed == derive_seed(77, "sps", 2)
    assert cfg.sps_y.sign_seed != cfg.sps_z.sign_seed


def test_power_curve_single_trial_values():
    plan = IidTestPlan(estimator=HSIC, m=10, r=2)
    curve = run_power_curve(
        plan, SETUP_Y, SETUP_Z, RotatedMixture(angle=0.0), n=40,
        sweep_variable="angle", sweep_values=[0.0, 0.4], trials=1, seed=5,
    )
    assert curve.power[0] in (0.0, 1.0)
    # With one trial the binomial half-width collapses to zero.
    assert curve.ci_halfwidth == (0.0, 0.0)
    assert curve.metadata == {"mode": "iid", "n": 40}
    rows = curve.rows()
    assert rows[0] == (0.0, curve.power[0], 0.0, 1, 5)


def test_power_curve_halfwidth_formula():
    plan = IidTestPlan(estimator=HSIC, m=10, r=2)
    curve = run_power_curve(
        plan, SETUP_Y, SETUP_Z, RotatedMixture(angle=0.0), n=40,
        sweep_variable="angle", sweep_values=[0.3], trials=50, seed=9,
    )
    f = curve.power[0]
    npt.assert_allclose(curve.ci_halfwidth[0], 1.96 * np.sqrt(f * (1 - f) / 50))


def test_power_curve_reproducible_and_thread_invariant():
    plan = IidTestPlan(estimator=HSIC, m=20, r=3)
    kwargs = dict(
        setup_y=SETUP_Y, setup_z=SETUP_Z, generator=RotatedMixture(angle=0.0),
        n=50, sweep_variable="angle", sweep_values=[0.0, 0.3], trials=40, seed=123,
    )
    a = run_power_curve(plan, **kwargs)
    b = run_power_curve(plan, **kwargs)
    c = run_power_curve(plan, threads=2, **kwargs)
    assert a.to_dict() == b.to_dict() == c.to_dict()


def test_power_curve_sweep_over_n():
    plan = IidTestPlan(estimator=HSIC, m=10, r=2)
    curve = run_power_curve(
        plan, SETUP_Y, SETUP_Z, RotatedMixture(angle=0.45), n=999,
        sweep_variable="n", sweep_values=[30, 120], trials=25, seed=31,
    )
    # The configured n is metadata only; each sweep value overrides it.
    assert curve.metadata["n"] == 999
    assert curve.power[1] >= curve.power[0]


def test_sweep_variable_validation():
    plan = IidTestPlan(estimator=HSIC)
    with pytest.raises(ValueError, match="rotated-mixture"):
        run_power_curve(
            plan, SETUP_Y, SETUP_Z, IndependentGaussian(), n=30,
            sweep_variable="angle", sweep_values=[0.1], trials=1, seed=0,
        )
    with pytest.raises(ValueError, match="extinct"):
        run_power_curve(
            plan, SETUP_Y, SETUP_Z, IndependentGaussian(), n=30,
            sweep_variable="radius", sweep_values=[0.5], trials=1, seed=0,
        )
    with pytest.raises(ValueError, match="sorted"):
        run_power_curve(
            plan, SETUP_Y, SETUP_Z, RotatedMixture(angle=0.0), n=30,
            sweep_variable="angle", sweep_values=[0.4, 0.1], trials=1, seed=0,
        )
    with pytest.raises(ValueError, match="at least 1"):
        run_power_curve(
            plan, SETUP_Y, SETUP_Z, RotatedMixture(angle=0.0), n=30,
            sweep_variable="angle", sweep_values=[0.1], trials=0, seed=0,
        )


def test_robust_trial_runs_end_to_end():
    plan = RobustTestPlan(
        estimator=HSIC, m=20, r=2, variants=40, q=1, alpha="0.2",
        grid_y=(np.linspace(-0.9, 0.9, 7),), grid_z=(np.linspace(-0.9, 0.9, 7),),
    )
    out = run_trial(plan, SETUP_Y, SETUP_Z, IndependentGaussian(), 100, trial_seed=3)
    assert out in (True, False)
