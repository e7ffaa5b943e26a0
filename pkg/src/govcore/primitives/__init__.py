from .kinds import (
    JUDGMENT_KINDS,
    CognitiveOutput,
    PrimitiveKind,
    ROUTING_TERMS,
    validate_payload,
)
from .registry import Registration, registry_lookup
from .salvage import parse_output
from .prompts import PromptBundle, PromptState, render_prompt

__all__ = [
    "CognitiveOutput",
    "JUDGMENT_KINDS",
    "PrimitiveKind",
    "PromptBundle",
    "PromptState",
    "Registration",
    "ROUTING_TERMS",
    "parse_output",
    "registry_lookup",
    "render_prompt",
    "validate_payload",
]
