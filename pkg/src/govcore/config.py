"""Three-layer configuration: workflow YAML (how to execute), domain YAML
(what the domain knows), case JSON (runtime input).

A new decision domain is configuration, not code: vocabulary, strategy,
floors, guardrails, compatibility map, and PII policy all ship in the domain
file. Unknown keys are errors, not warnings; silent config drift defeats
governance. Field names beyond the core set are repo-defined and documented
in the README schema section.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .errors import CaseSchemaError, ConfigError, TriggerParseError
from .governance import GovernanceTier
from .orchestrator import (
    DEFAULT_MAX_REPEAT,
    DEFAULT_MAX_STEPS,
    DEFAULT_TRANSITION_TABLE,
    TrajectoryConstraints,
)
from .primitives.kinds import PrimitiveKind, ROUTING_TERMS
from .safety import GuardrailPattern, PiiRule
from .triggers import parse_trigger

SCHEMA_VERSION = 1

ALL_PRIMITIVES = frozenset(PrimitiveKind)


@dataclass
class DomainConfig:
    domain_id: str
    deliberate_vocabulary: frozenset
    routing_terms_excluded: bool
    orchestrator_strategy: str
    knowledge_sources: dict
    default_tier: GovernanceTier
    confidence_floors: dict
    high_stakes_dispositions: frozenset
    sla_hours: dict
    gate_triggers: list = field(default_factory=list)
    guardrails: list = field(default_factory=list)
    compatibility_map: dict = field(default_factory=dict)
    pii_policy: list = field(default_factory=list)
    case_required_fields: list = field(default_factory=list)
    transition_table: dict = field(default_factory=dict)
    verification_rules: list = field(default_factory=list)


@dataclass
class WorkflowConfig:
    workflow_id: str
    mode: str
    goal: str
    available_primitives: frozenset
    declared_steps: list
    constraints: TrajectoryConstraints


@dataclass
class CaseInput:
    case_id: str
    fields: dict  # prompt-visible view, ground truth stripped
    ground_truth_complexity: Optional[dict] = None

    def narrative_fields(self) -> dict:
        return self.fields


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ConfigError(f"{path}.{key}", "missing required key")
    return data[key]


def _check_keys(data: dict, allowed: set, path: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")


def _typed(value, expected, path: str):
    if not isinstance(value, expected):
        raise ConfigError(path, f"expected {expected.__name__}")
    return value


def _kind(name: str, path: str) -> PrimitiveKind:
    try:
        return PrimitiveKind(name)
    except ValueError:
        raise ConfigError(path, f"unknown primitive {name!r}") from None


def _tier(name: str, path: str) -> GovernanceTier:
    try:
        return GovernanceTier(str(name).upper())
    except ValueError:
        raise ConfigError(path, f"unknown tier {name!r}") from None


def _load_yaml(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError("", "top-level mapping expected")
    return data


def load_domain(path: str) -> DomainConfig:
    return parse_domain(_load_yaml(path))


def parse_domain(data: dict) -> DomainConfig:
    _check_keys(
        data,
        {
            "schema_version",
            "domain_id",
            "deliberate_vocabulary",
            "routing_terms_excluded",
            "orchestrator_strategy",
            "knowledge_sources",
            "governance",
            "guardrails",
            "compatibility_map",
            "pii_policy",
            "case_schema",
            "transition_overrides",
            "verification_rules",
        },
        "",
    )
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(".schema_version", f"expected {SCHEMA_VERSION}")
    domain_id = _typed(_require(data, "domain_id", ""), str, ".domain_id")
    vocabulary = _typed(
        _require(data, "deliberate_vocabulary", ""), list, ".deliberate_vocabulary"
    )
    if not vocabulary:
        raise ConfigError(".deliberate_vocabulary", "must be nonempty")
    routing_excluded = bool(data.get("routing_terms_excluded", True))
    if routing_excluded:
        clash = set(vocabulary) & ROUTING_TERMS
        if clash:
            raise ConfigError(
                ".deliberate_vocabulary",
                f"{sorted(clash)} are routing terms and this domain excludes them",
            )

    gov = _typed(_require(data, "governance", ""), dict, ".governance")
    _check_keys(
        gov,
        {
            "default_tier",
            "confidence_floors",
            "high_stakes_dispositions",
            "sla_hours",
            "gate_triggers",
        },
        ".governance",
    )
    floors = {}
    for kind_name, floor in (gov.get("confidence_floors") or {}).items():
        _kind(kind_name, f".governance.confidence_floors.{kind_name}")
        if not isinstance(floor, (int, float)) or not 0 <= float(floor) <= 1:
            raise ConfigError(
                f".governance.confidence_floors.{kind_name}", "floor must be in [0, 1]"
            )
        floors[kind_name] = float(floor)
    sla = {}
    for tier_name, hours in (gov.get("sla_hours") or {}).items():
        sla[_tier(tier_name, f".governance.sla_hours.{tier_name}").value] = int(hours)
    triggers = list(gov.get("gate_triggers") or [])
    for i, expr in enumerate(triggers):
        try:
            parse_trigger(expr)
        except TriggerParseError as exc:
            raise ConfigError(f".governance.gate_triggers[{i}]", str(exc)) from None

    guardrails = []
    for i, raw in enumerate(data.get("guardrails") or []):
        _check_keys(raw, {"id", "category", "severity", "regex"}, f".guardrails[{i}]")
        guardrails.append(
            GuardrailPattern(
                pattern_id=_require(raw, "id", f".guardrails[{i}]"),
                category=_require(raw, "category", f".guardrails[{i}]"),
                severity=_require(raw, "severity", f".guardrails[{i}]"),
                regex=_require(raw, "regex", f".guardrails[{i}]"),
            )
        )

    pii = []
    for i, raw in enumerate(data.get("pii_policy") or []):
        _check_keys(raw, {"category", "regex"}, f".pii_policy[{i}]")
        pii.append(PiiRule(raw["category"], raw["regex"]))

    table = {k: set(v) for k, v in DEFAULT_TRANSITION_TABLE.items()}
    for kind_name, successors in (data.get("transition_overrides") or {}).items():
        kind = _kind(kind_name, f".transition_overrides.{kind_name}")
        table[kind] = {
            _kind(s, f".transition_overrides.{kind_name}[{i}]")
            for i, s in enumerate(successors)
        }

    case_schema = data.get("case_schema") or {}
    _check_keys(case_schema, {"required"}, ".case_schema")

    return DomainConfig(
        domain_id=domain_id,
        deliberate_vocabulary=frozenset(vocabulary),
        routing_terms_excluded=routing_excluded,
        orchestrator_strategy=_typed(
            _require(data, "orchestrator_strategy", ""), str, ".orchestrator_strategy"
        ),
        knowledge_sources=dict(data.get("knowledge_sources") or {}),
        default_tier=_tier(gov.get("default_tier", "AUTO"), ".governance.default_tier"),
        confidence_floors=floors,
        high_stakes_dispositions=frozenset(gov.get("high_stakes_dispositions") or []),
        sla_hours=sla,
        gate_triggers=triggers,
        guardrails=guardrails,
        compatibility_map={
            k: set(v) for k, v in (data.get("compatibility_map") or {}).items()
        },
        pii_policy=pii,
        case_required_fields=list(case_schema.get("required") or []),
        transition_table=table,
        verification_rules=list(data.get("verification_rules") or []),
    )


def load_workflow(path: str) -> WorkflowConfig:
    return parse_workflow(_load_yaml(path))


def parse_workflow(data: dict) -> WorkflowConfig:
    _check_keys(
        data,
        {
            "schema_version",
            "workflow_id",
            "mode",
            "goal",
            "available_primitives",
            "declared_steps",
            "constraints",
        },
        "",
    )
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(".schema_version", f"expected {SCHEMA_VERSION}")
    workflow_id = _typed(_require(data, "workflow_id", ""), str, ".workflow_id")
    mode = _require(data, "mode", "")
    if mode not in ("workflow", "agentic"):
        raise ConfigError(".mode", f"expected workflow or agentic, got {mode!r}")

    raw_constraints = data.get("constraints") or {}
    _check_keys(
        raw_constraints,
        {"must_include", "max_steps", "must_end_with", "max_repeat"},
        ".constraints",
    )
    must_include = frozenset(
        _kind(k, f".constraints.must_include[{i}]")
        for i, k in enumerate(raw_constraints.get("must_include") or [])
    )
    max_repeat = {}
    for kind_name, limit in (raw_constraints.get("max_repeat") or {}).items():
        _kind(kind_name, f".constraints.max_repeat.{kind_name}")
        max_repeat[kind_name] = int(limit)
    constraints = TrajectoryConstraints(
        must_include=must_include,
        max_steps=int(raw_constraints.get("max_steps", DEFAULT_MAX_STEPS)),
        must_end_with=_kind(
            raw_constraints.get("must_end_with", "govern"), ".constraints.must_end_with"
        ),
        max_repeat=max_repeat,
    )
    constraints.validate()

    declared = []
    if mode == "workflow":
        steps = data.get("declared_steps")
        if not steps:
            raise ConfigError(".declared_steps", "workflow mode requires declared steps")
        for i, raw in enumerate(steps):
            _check_keys(
                raw,
                {"step_name", "primitive", "params", "transition_condition"},
                f".declared_steps[{i}]",
            )
            kind = _kind(
                _require(raw, "primitive", f".declared_steps[{i}]"),
                f".declared_steps[{i}].primitive",
            )
            condition = raw.get("transition_condition")
            if condition is not None:
                try:
                    parse_trigger(condition)
                except TriggerParseError as exc:
                    raise ConfigError(
                        f".declared_steps[{i}].transition_condition", str(exc)
                    ) from None
            declared.append(
                {
                    "step_name": raw.get("step_name", f"{kind.value}_{i + 1}"),
                    "primitive": kind.value,
                    "params": dict(raw.get("params") or {}),
                    "transition_condition": condition,
                }
            )
        available = frozenset(PrimitiveKind(s["primitive"]) for s in declared)
        goal = data.get("goal", "")
    else:
        goal = _require(data, "goal", "")
        if not isinstance(goal, str) or not goal.strip():
            raise ConfigError(".goal", "agentic mode requires a nonempty goal")
        names = data.get("available_primitives")
        available = (
            frozenset(
                _kind(n, f".available_primitives[{i}]") for i, n in enumerate(names)
            )
            if names
            else ALL_PRIMITIVES
        )
        if PrimitiveKind.GOVERN not in available:
            raise ConfigError(".available_primitives", "agentic mode requires govern")

    return WorkflowConfig(
        workflow_id=workflow_id,
        mode=mode,
        goal=goal,
        available_primitives=available,
        declared_steps=declared,
        constraints=constraints,
    )


def load_case(source, domain: Optional[DomainConfig] = None) -> CaseInput:
    """Load a case from a path or an already-parsed body."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    if not isinstance(data, dict):
        raise CaseSchemaError("case body must be a JSON object")
    if "case_id" not in data or not isinstance(data["case_id"], str):
        raise CaseSchemaError("case_id is required")
    if domain is not None:
        missing = [f for f in domain.case_required_fields if f not in data]
        if missing:
            raise CaseSchemaError(f"missing required case fields: {missing}")
    fields = {k: v for k, v in data.items() if k != "ground_truth_complexity"}
    return CaseInput(
        case_id=data["case_id"],
        fields=fields,
        ground_truth_complexity=data.get("ground_truth_complexity"),
    )
