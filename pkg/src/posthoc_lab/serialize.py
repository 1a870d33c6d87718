"""Scenario files: JSON documents that describe a space, a family, named
levels, a loss, a certainty equivalent and the audit to run on them.

Documents are validated against the schemas in ``posthoc_lab/schemas`` before
use. Rationals are written as ``"p/q"`` strings and infinity as ``"inf"``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

import jsonschema

from .axioms import (
    MONOTONICITY,
    NESTING,
    PRESERVATION,
    AuditReport,
    ReplicationBundle,
    audit_mean_level,
    check_monotonicity,
    check_preservation,
)
from .backend import RATIONAL, format_number, leq, to_number
from .finprob import FiniteSpace
from .scenarios import Scenario
from .testfam import DataDependentLevel, TestFamily, family_from_json
from .validity import (
    EXPECTATION_RHO,
    CertaintyEquivalent,
    LossFunction,
    general_notion,
    general_validity,
    loss_from_json,
    rho_from_json,
)

SCHEMA_VERSION = 1
MEAN_LEVEL = "mean_level"


class ConfigError(ValueError):
    """A scenario or report document is malformed."""


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("posthoc_lab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc: Mapping, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{name} document invalid at {path}: {exc.message}") from None


def canonical_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(doc) -> str:
    return hashlib.sha256(canonical_dumps(doc).encode()).hexdigest()


@dataclass
class ScenarioConfig:
    """A parsed scenario document."""

    space: FiniteSpace
    family: TestFamily
    levels: dict
    loss: LossFunction
    rho: CertaintyEquivalent
    audit: dict
    backend: str = RATIONAL
    seed: int = 0
    name: str = ""
    notes: dict = field(default_factory=dict)

    def notion(self):
        from .validity import mean_level_notion

        if self.audit.get("notion") == MEAN_LEVEL:
            return mean_level_notion()
        return general_notion(self.rho, self.loss)

    def to_json(self) -> dict:
        doc = {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "backend": self.backend,
            "seed": self.seed,
            "space": self.space.to_json(),
            "family": self.family.to_json(),
            "levels": {k: v.to_json() for k, v in self.levels.items()},
            "loss": self.loss.to_json(),
            "rho": self.rho.to_json(),
            "audit": self.audit,
        }
        if self.notes:
            doc["notes"] = self.notes
        return doc

    def level(self, name: str) -> DataDependentLevel:
        try:
            return self.levels[name]
        except KeyError:
            raise ConfigError(f"audit refers to unknown level {name!r}") from None


def load_scenario(doc: Mapping, backend: str | None = None) -> ScenarioConfig:
    """Parse and validate a scenario document; ``backend`` overrides the file's."""
    validate(doc, "scenario")
    backend = backend or doc.get("backend", RATIONAL)
    try:
        space = FiniteSpace.from_json(doc["space"], backend)
        family = family_from_json(doc["family"], space, backend)
        levels = {k: DataDependentLevel.from_json(v, space, backend) for k, v in doc.get("levels", {}).items()}
        loss = loss_from_json(doc.get("loss", {"canonical": True}), backend)
        rho = rho_from_json(doc.get("rho", "expectation"), backend)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"scenario does not resolve: {exc}") from None
    cfg = ScenarioConfig(space, family, levels, loss, rho, dict(doc.get("audit", {})), backend,
                         doc.get("seed", 0), doc.get("name", ""), dict(doc.get("notes", {})))
    for key in ("level", "valid", "weaker"):
        if key in cfg.audit:
            cfg.level(cfg.audit[key])
    return cfg


def scenario_doc(
    scenario: Scenario,
    audit: dict,
    rho: CertaintyEquivalent = EXPECTATION_RHO,
    loss: LossFunction | None = None,
    seed: int = 0,
    notes: dict | None = None,
) -> dict:
    cfg = ScenarioConfig(scenario.space, scenario.phi, dict(scenario.levels), loss or LossFunction.canonical(),
                         rho, audit, scenario.space.backend, seed, scenario.name, notes or {})
    return cfg.to_json()


def bundle_doc(bundle: ReplicationBundle, rho: CertaintyEquivalent, seed: int = 0) -> dict:
    """Scenario reproducing the audit a replication bundle is built to break."""
    fixed = DataDependentLevel.constant(bundle.Y.space, bundle.a)
    scen = Scenario(bundle.Y.space, bundle.phi, {"alpha_tilde": bundle.alpha_tilde, "fixed": fixed}, bundle.regime)
    if bundle.regime == "subcritical":
        audit = {"kind": MONOTONICITY, "valid": "fixed", "weaker": "alpha_tilde"}
    else:
        audit = {"kind": PRESERVATION, "level": "alpha_tilde", "a": [format_number(bundle.a)]}
    notes = {
        "a": format_number(bundle.a),
        "delta": format_number(bundle.delta),
        "M": format_number(bundle.M),
        "Y": [format_number(v) for v in bundle.Y.values],
        "rejection_probability": format_number(bundle.rejection_probability()),
    }
    return scenario_doc(scen, audit, rho, bundle.L, seed, notes)


def run_scenario(cfg: ScenarioConfig) -> AuditReport:
    """Run the audit a scenario document asks for."""
    kind = cfg.audit.get("kind")
    if kind == MONOTONICITY:
        return check_monotonicity(cfg.family, cfg.level(cfg.audit["valid"]), cfg.level(cfg.audit["weaker"]),
                                  cfg.notion())
    if kind == PRESERVATION:
        a_grid = [to_number(a, cfg.backend) for a in cfg.audit.get("a", [])]
        return check_preservation(cfg.family, cfg.level(cfg.audit["level"]), cfg.notion(), a_grid)
    if kind == MEAN_LEVEL:
        a_grid = [to_number(a, cfg.backend) for a in cfg.audit.get("a", [])]
        return audit_mean_level(cfg.family, cfg.level(cfg.audit["level"]), a_grid)
    if kind == NESTING:
        at = cfg.level(cfg.audit["level"])
        res = general_validity(cfg.family, at, cfg.rho, cfg.loss)
        p = cfg.family.rejection_probability(at.levels[0])
        agrees = res.passed == leq(p, at.levels[0])
        ce = None if agrees else {"alpha": format_number(at.levels[0]), "p": format_number(p),
                                  "score": format_number(res.score)}
        return AuditReport(NESTING, agrees, ce, {"rho": cfg.rho.name})
    raise ConfigError(f"unknown audit kind {kind!r}")
