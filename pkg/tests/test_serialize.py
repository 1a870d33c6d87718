import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from posthoc_lab.axioms import dominated_level_example, replicate_subcritical, replicate_supercritical
from posthoc_lab.finprob import FiniteSpace, RandomVariable
from posthoc_lab.scenarios import mean_level_comparator_scenario
from posthoc_lab.serialize import (
    ConfigError,
    bundle_doc,
    config_hash,
    load_schema,
    load_scenario,
    run_scenario,
    scenario_doc,
    validate,
)
from posthoc_lab.validity import ESSSUP_RHO, parse_rho

F = Fraction
SCHEMA_DIR = Path(__file__).resolve().parents[1] / "schemas"


def esssup_doc():
    ex = dominated_level_example(100)
    return scenario_doc(ex.as_scenario(), {"kind": "monotonicity", "valid": "alpha0", "weaker": "alpha1"}, ESSSUP_RHO)


@pytest.mark.parametrize("name", ["scenario", "decision", "evalue", "report"])
def test_schemas_are_valid_and_versioned(name):
    schema = load_schema(name)
    jsonschema.Draft202012Validator.check_schema(schema)
    on_disk = json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())
    assert on_disk == schema
    assert "$id" in schema and "v1" in schema["$id"]


def test_scenario_roundtrip_keeps_the_hash():
    doc = esssup_doc()
    validate(doc, "scenario")
    again = load_scenario(doc).to_json()
    assert config_hash(again) == config_hash(doc)


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})


def test_invalid_documents_raise_config_error():
    doc = esssup_doc()
    doc["rho"] = "median"
    with pytest.raises(ConfigError):
        load_scenario(doc)
    doc = esssup_doc()
    doc["audit"]["valid"] = "missing"
    with pytest.raises(ConfigError):
        load_scenario(doc)
    doc = esssup_doc()
    del doc["space"]
    with pytest.raises(ConfigError, match="space"):
        load_scenario(doc)


def test_masses_not_summing_to_one():
    doc = esssup_doc()
    first = doc["space"]["outcomes"][0]
    doc["space"]["mass"][first] = "1/2"
    with pytest.raises(ConfigError):
        load_scenario(doc)


def test_run_monotonicity_scenario():
    rep = run_scenario(load_scenario(esssup_doc()))
    assert not rep.passed


def test_backend_override():
    cfg = load_scenario(esssup_doc(), backend="double")
    assert cfg.space.backend == "double"
    assert not run_scenario(cfg).passed


def test_bundle_docs_reproduce():
    skewed = FiniteSpace(["y0", "y1"], [F(99, 100), F(1, 100)])
    sub = replicate_subcritical(RandomVariable(skewed, [F(0), F(50)]), delta=F(1, 2), a=F(3, 250))
    assert not run_scenario(load_scenario(bundle_doc(sub, ESSSUP_RHO))).passed
    space = FiniteSpace.uniform(["y0", "y1"])
    sup = replicate_supercritical(RandomVariable(space, [F(1, 2), F(2)]), delta=F(1, 10), a=F(1, 5))
    assert not run_scenario(load_scenario(bundle_doc(sup, parse_rho("quantile:0.5")))).passed


def test_mean_level_scenario():
    scen = mean_level_comparator_scenario()
    doc = scenario_doc(scen, {"kind": "mean_level", "level": "alpha_tilde", "notion": "mean_level"})
    rep = run_scenario(load_scenario(doc))
    assert not rep.passed
    assert rep.metadata["mean_level"]["passed"]
