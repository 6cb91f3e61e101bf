import json

import pytest

from synindep.config import (
    ConfigError,
    load_config,
    parse_config,
    resolve_data_path,
)
from synindep.depmeasure import DistanceCovariance, GaussianKernel, Hsic, LinearKernel
from synindep.experiments import IidTestPlan, RobustTestPlan
from synindep.generators import (
    CustomSampler,
    ExtinctGaussian,
    IndependentGaussian,
    RotatedMixture,
)

MINIMAL = {"schema_version": 1}


def full_doc():
    return {
        "schema_version": 1,
        "seed": 7,
        "n": 100,
        "systems": {
            "y": {"structure": {"type": "arx", "na": 1}, "params": [0.5]},
            "z": {"structure": {"type": "arx", "na": 1}, "params": [0.3]},
        },
        "generator": {"kind": "rotated_mixture", "angle": 0.3},
        "input": {"kind": "zeros"},
        "data": {"y": "y.csv", "z": "z.csv"},
        "test": {
            "mode": "iid",
            "estimator": {"kind": "hsic"},
            "rank": {"m": 40, "r": 6},
        },
        "monte_carlo": {"trials": 10, "sweep": {"variable": "angle", "values": [0.0, 0.2]}},
    }


def test_minimal_config_has_sane_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.seed == 0
    assert cfg.test.mode == "iid"
    plan = cfg.plan()
    assert isinstance(plan, IidTestPlan)
    assert (plan.m, plan.r) == (40, 6)
    assert isinstance(plan.estimator, Hsic)


def test_full_config_round_trip():
    cfg = parse_config(full_doc())
    assert cfg.systems.y.setup("y").params == (0.5,)
    assert isinstance(cfg.generator.build(), RotatedMixture)
    assert cfg.monte_carlo.sweep.values == [0.0, 0.2]


def test_unknown_keys_are_named():
    doc = full_doc()
    doc["typo_key"] = 1
    with pytest.raises(ConfigError, match="typo_key"):
        parse_config(doc)
    doc = full_doc()
    doc["test"]["rank"]["bandwidth"] = 2.0
    with pytest.raises(ConfigError, match="bandwidth"):
        parse_config(doc)


def test_schema_version_is_enforced():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config({})
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config({"schema_version": 2})


def test_rank_needs_exactly_one_threshold():
    doc = full_doc()
    doc["test"]["rank"] = {"m": 40, "r": 6, "alpha": 0.15}
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(doc)
    doc["test"]["rank"] = {"m": 40}
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(doc)


def test_rank_alpha_resolves_to_integer_threshold():
    doc = full_doc()
    doc["test"]["rank"] = {"m": 40, "alpha": 0.15}
    cfg = parse_config(doc)
    rank = cfg.test.rank.build(perm_seed=0, tie_seed=0)
    assert rank.r == 6
    doc["test"]["rank"] = {"m": 7, "alpha": 0.15}
    with pytest.raises(ValueError, match="not exactly representable"):
        parse_config(doc).test.rank.build(perm_seed=0, tie_seed=0)


def test_estimator_variants_build():
    doc = full_doc()
    doc["test"]["estimator"] = {"kind": "dcov"}
    assert isinstance(parse_config(doc).test.estimator.build(), DistanceCovariance)
    doc["test"]["estimator"] = {
        "kind": "hsic",
        "kernel_e": {"kind": "linear"},
        "kernel_n": {"kind": "gaussian", "bandwidth": 0.8},
    }
    est = parse_config(doc).test.estimator.build()
    assert isinstance(est.kernel_e, LinearKernel)
    assert isinstance(est.kernel_n, GaussianKernel) and est.kernel_n.bandwidth == 0.8


def test_generator_variants_build():
    cases = {
        "independent_gaussian": IndependentGaussian,
        "rotated_mixture": RotatedMixture,
        "extinct_gaussian": ExtinctGaussian,
        "custom": CustomSampler,
    }
    for kind, cls in cases.items():
        doc = full_doc()
        doc["generator"] = {"kind": kind}
        if kind == "rotated_mixture":
            doc["generator"]["angle"] = 0.1
        if kind == "extinct_gaussian":
            doc["generator"]["radius"] = 1.0
        assert isinstance(parse_config(doc).generator.build(), cls)


def test_robust_plan_fills_threshold_from_level():
    doc = full_doc()
    doc["test"]["mode"] = "robust"
    doc["test"]["robust"] = {
        "alpha": 0.15,
        "m": 40,
        "sps": {"variants": 80, "q": 1},
        "grid_y": [{"lo": -0.9, "hi": 0.9, "points": 19}],
        "grid_z": [{"lo": -0.9, "hi": 0.9, "points": 19}],
    }
    plan = parse_config(doc).plan()
    assert isinstance(plan, RobustTestPlan)
    # Largest r with r/40 + 2/80 <= 0.15.
    assert plan.r == 5
    assert plan.grid_y[0].size == 19


def test_grid_axis_validation():
    doc = full_doc()
    doc["test"]["robust"] = {"grid_y": [{"lo": 0.5, "hi": -0.5}]}
    with pytest.raises(ConfigError, match="lo <= hi"):
        parse_config(doc)
    doc["test"]["robust"] = {"grid_y": [{"points": 0}]}
    with pytest.raises(ConfigError, match="at least one point"):
        parse_config(doc)


def test_sweep_validation():
    doc = full_doc()
    doc["monte_carlo"]["sweep"]["values"] = [0.3, 0.1]
    with pytest.raises(ConfigError, match="sorted"):
        parse_config(doc)
    doc["monte_carlo"]["sweep"] = {"variable": "angle", "values": []}
    with pytest.raises(ConfigError, match="non-empty"):
        parse_config(doc)
    doc = full_doc()
    doc["monte_carlo"]["trials"] = 0
    with pytest.raises(ConfigError, match="at least 1"):
        parse_config(doc)


def test_require_names_the_missing_section():
    cfg = parse_config(MINIMAL)
    with pytest.raises(ConfigError, match="'generator'"):
        cfg.require("generator")
    with pytest.raises(ConfigError, match="params is required"):
        cfg.systems.y.setup("y")


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(full_doc()))
    assert load_config(good).seed == 7


def test_resolve_data_path(tmp_path):
    cfg_path = tmp_path / "nested" / "config.json"
    assert resolve_data_path(cfg_path, "data.csv") == tmp_path / "nested" / "data.csv"
    assert resolve_data_path(cfg_path, "/abs/data.csv").as_posix() == "/abs/data.csv"
