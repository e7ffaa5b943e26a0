"""Model backends behind a single completion contract.

Two backends ship: a deterministic scripted backend that replays canned
outputs keyed by step occurrence (the testing substrate; script exhaustion
is an explicit failure, never a silent fallback), and a generic HTTP
chat-completion client configured by environment variables. Parse failures
retry with the salvage diagnostics appended to the prompt; the attempt list
is recorded so the quality gate can apply its final-attempt rule.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .errors import ExhaustedRetries, ParseFailure, ScriptExhausted, ScriptMismatch
from .primitives.kinds import CognitiveOutput, PrimitiveKind
from .primitives.prompts import PromptBundle
from .primitives.registry import DEFAULT_TOKEN_BUDGET, registry_lookup
from .primitives.salvage import parse_output

logger = logging.getLogger(__name__)

DEFAULT_RETRY_LIMIT = 3


class Backend(Protocol):
    identity: str

    def complete(
        self, bundle: PromptBundle, alias: str, budget: int, temperature: float
    ) -> tuple[str, dict]: ...


@dataclass(frozen=True)
class ModelPolicy:
    """Alias map, per-primitive budgets, and retry limit."""

    aliases: dict = field(default_factory=lambda: {"default": "", "standard": ""})
    budgets: dict = field(default_factory=dict)  # kind name -> tokens
    retry_limit: int = DEFAULT_RETRY_LIMIT

    def resolve(self, kind: PrimitiveKind) -> tuple[str, int, float]:
        registration = registry_lookup(kind)
        budget = self.budgets.get(kind.value, registration.token_budget)
        return registration.model_alias, budget, registration.temperature

    @staticmethod
    def from_file(path: str) -> "ModelPolicy":
        import yaml

        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        return ModelPolicy(
            aliases=dict(data.get("aliases") or {}),
            budgets={k: int(v) for k, v in (data.get("budgets") or {}).items()},
            retry_limit=int(data.get("retry_limit", DEFAULT_RETRY_LIMIT)),
        )


def execute(
    kind: PrimitiveKind,
    bundle: PromptBundle,
    policy: ModelPolicy,
    backend: Backend,
    domain=None,
) -> tuple[CognitiveOutput, list[dict]]:
    """Run one primitive completion with retry-on-parse-failure.

    Returns the validated output and the full attempt list; recovered
    failures stay on the record for audit completeness.
    """
    alias, budget, temperature = policy.resolve(kind)
    attempts: list[dict] = []
    prompt = bundle
    last_failure: Optional[ParseFailure] = None
    for attempt_no in range(1, policy.retry_limit + 1):
        raw, usage = backend.complete(prompt, alias, budget, temperature)
        try:
            output = parse_output(kind, raw, domain)
        except ParseFailure as failure:
            last_failure = failure
            attempts.append(
                {
                    "attempt": attempt_no,
                    "ok": False,
                    "error": "; ".join(failure.diagnostics)[:500],
                }
            )
            prompt = bundle.with_appendix(
                "The previous response could not be parsed. Diagnostics:\n"
                + "\n".join(failure.diagnostics)
                + "\nRespond with exactly one valid JSON object."
            )
            continue
        attempts.append(
            {
                "attempt": attempt_no,
                "ok": True,
                "confidence": output.confidence,
                "salvage_stage": output.salvage_stage,
            }
        )
        return output, attempts
    raise ExhaustedRetries(len(attempts), last_failure)


# -- scripted backend ----------------------------------------------------------


@dataclass
class ScriptedStep:
    step_name: str
    primitive: str
    outputs: list  # successive attempt outputs; dicts are dumped to JSON


@dataclass
class TrajectoryScript:
    case_id: str
    chooser: list  # primitive names for decided_by=model slots
    steps: list  # ScriptedStep

    @staticmethod
    def from_file(path: str) -> "TrajectoryScript":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return TrajectoryScript.from_dict(data)

    @staticmethod
    def from_dict(data: dict) -> "TrajectoryScript":
        steps = [
            ScriptedStep(
                step_name=raw.get("step_name", ""),
                primitive=raw["primitive"],
                outputs=raw["outputs"] if "outputs" in raw else [raw["output"]],
            )
            for raw in data["steps"]
        ]
        return TrajectoryScript(
            case_id=data["case_id"], chooser=list(data.get("chooser") or []), steps=steps
        )


class ScriptedBackend:
    """Replays canned outputs in order; byte-identical for identical scripts."""

    identity = "scripted"

    def __init__(self, script: TrajectoryScript):
        self.script = script
        self._step_idx = 0
        self._attempt_idx = 0
        self._lock = threading.Lock()

    def complete(
        self, bundle: PromptBundle, alias: str, budget: int, temperature: float
    ) -> tuple[str, dict]:
        kind = bundle.template_id
        with self._lock:
            if self._step_idx >= len(self.script.steps):
                raise ScriptExhausted(self.script.case_id, kind)
            step = self.script.steps[self._step_idx]
            if step.primitive != kind:
                raise ScriptMismatch(
                    f"script expects {step.primitive} at position {self._step_idx}, "
                    f"runtime asked for {kind}"
                )
            if self._attempt_idx >= len(step.outputs):
                raise ScriptExhausted(
                    self.script.case_id, f"{step.primitive} attempt {self._attempt_idx + 1}"
                )
            output = step.outputs[self._attempt_idx]
            if self._attempt_idx + 1 < len(step.outputs):
                self._attempt_idx += 1  # another attempt is scripted
            else:
                self._step_idx += 1
                self._attempt_idx = 0
        raw = output if isinstance(output, str) else json.dumps(output, sort_keys=True)
        return raw, {"backend": self.identity, "tokens": 0}


class ScriptedChooser:
    """Scripted orchestrator decisions; counts invocations so tests can
    assert the chooser is never consulted when an override fires."""

    def __init__(self, choices: list, case_id: str = ""):
        self.choices = list(choices)
        self.case_id = case_id
        self.calls = 0
        self._idx = 0

    def __call__(self, view, legal, note: Optional[str] = None) -> tuple[str, str]:
        self.calls += 1
        if self._idx >= len(self.choices):
            raise ScriptExhausted(self.case_id, "chooser")
        choice = self.choices[self._idx]
        self._idx += 1
        return choice, f"scripted choice {self._idx}"


class LlmChooser:
    """Model-backed orchestrator decisions over the legal next-set.

    The prompt carries the accumulated workflow state, the available
    primitives, the domain strategy text, the routing log, and the legal
    set; the response is one JSON object naming the next primitive.
    """

    def __init__(self, backend: Backend, policy: ModelPolicy, domain, state_text):
        self.backend = backend
        self.policy = policy
        self.domain = domain
        self.state_text = state_text  # callable returning the context text

    def __call__(self, view, legal, note: Optional[str] = None) -> tuple[str, str]:
        subject_lines = [
            f"Available primitives: {', '.join(sorted(k.value for k in view.available))}",
            f"Legal next set: {', '.join(legal)}",
            f"Steps executed: {view.steps_executed}",
        ]
        if note:
            subject_lines.append(f"Correction: {note}")
        rules_lines = [self.domain.orchestrator_strategy, "Routing log:"]
        rules_lines += [f"- {line}" for line in view.routing_log] or ["- (empty)"]
        bundle = PromptBundle(
            template_id="orchestrator",
            context=self.state_text(),
            subject="\n".join(subject_lines),
            rules_or_scope="\n".join(rules_lines),
            output_schema=json.dumps(
                {"next": "one primitive from the legal set", "reasoning": "string"},
                indent=2, sort_keys=True,
            ),
        )
        raw, _ = self.backend.complete(
            bundle, "default", DEFAULT_TOKEN_BUDGET, 0.2
        )
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            start = raw.find("{")
            end = raw.rfind("}")
            obj = json.loads(raw[start : end + 1]) if start >= 0 <= end else {}
        return str(obj.get("next", "")), str(obj.get("reasoning", ""))


# -- live backend ----------------------------------------------------------------


class HttpChatBackend:
    """Generic chat-completion client driven by environment variables.

    LLM_ENDPOINT, LLM_API_KEY, and per-alias model ids (LLM_MODEL_DEFAULT,
    LLM_MODEL_STANDARD) select the deployment; the wire format is the common
    messages/choices JSON shape.
    """

    identity = "http"

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        model_ids: Optional[dict] = None,
        client=None,
    ):
        self.endpoint = endpoint or os.environ.get("LLM_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("LLM_API_KEY", "")
        self.model_ids = model_ids or {
            "default": os.environ.get("LLM_MODEL_DEFAULT", ""),
            "standard": os.environ.get("LLM_MODEL_STANDARD", ""),
        }
        self._client = client

    def complete(
        self, bundle: PromptBundle, alias: str, budget: int, temperature: float
    ) -> tuple[str, dict]:
        import httpx

        if not self.endpoint:
            raise RuntimeError("LLM_ENDPOINT is not configured")
        client = self._client or httpx
        response = client.post(
            self.endpoint,
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={
                "model": self.model_ids.get(alias, self.model_ids.get("default", "")),
                "messages": [{"role": "user", "content": bundle.text}],
                "temperature": temperature,
                "max_tokens": budget,
            },
            timeout=120.0,
        )
        response.raise_for_status()
        body = response.json()
        text = body["choices"][0]["message"]["content"]
        return text, {"backend": self.identity, "usage": body.get("usage", {})}


def backend_from_env(script: Optional[TrajectoryScript] = None) -> Backend:
    provider = os.environ.get("LLM_PROVIDER", "scripted")
    if provider == "scripted":
        if script is None:
            raise RuntimeError("scripted provider requires a trajectory script")
        return ScriptedBackend(script)
    return HttpChatBackend()
