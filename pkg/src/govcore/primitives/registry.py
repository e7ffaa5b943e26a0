"""Registry of the nine primitives: required/optional parameters, prompt
template, model alias, and sampling defaults."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnknownPrimitive
from .kinds import PrimitiveKind

DEFAULT_TOKEN_BUDGET = 16384


@dataclass(frozen=True)
class Registration:
    kind: PrimitiveKind
    required_params: tuple[str, ...]
    optional_params: dict = field(default_factory=dict)
    template_id: str = ""
    model_alias: str = "default"
    temperature: float = 0.2
    token_budget: int = DEFAULT_TOKEN_BUDGET


_REGISTRY: dict[PrimitiveKind, Registration] = {
    PrimitiveKind.RETRIEVE: Registration(
        PrimitiveKind.RETRIEVE,
        required_params=("sources",),
        optional_params={"synthesis_focus": ""},
        template_id="retrieve",
        model_alias="default",
    ),
    PrimitiveKind.CLASSIFY: Registration(
        PrimitiveKind.CLASSIFY,
        required_params=("categories",),
        template_id="classify",
        model_alias="standard",
        temperature=0.0,  # reproducibility of categorical assignment
    ),
    PrimitiveKind.INVESTIGATE: Registration(
        PrimitiveKind.INVESTIGATE,
        required_params=("question",),
        optional_params={"scope": ""},
        template_id="investigate",
        model_alias="default",
    ),
    PrimitiveKind.VERIFY: Registration(
        PrimitiveKind.VERIFY,
        required_params=("rules",),
        template_id="verify",
        model_alias="standard",
    ),
    PrimitiveKind.CHALLENGE: Registration(
        PrimitiveKind.CHALLENGE,
        required_params=(),
        optional_params={"perspective": "strongest opposing view"},
        template_id="challenge",
        model_alias="standard",
    ),
    PrimitiveKind.REFLECT: Registration(
        PrimitiveKind.REFLECT,
        required_params=(),
        optional_params={"focus": ""},
        template_id="reflect",
        model_alias="standard",
    ),
    PrimitiveKind.DELIBERATE: Registration(
        PrimitiveKind.DELIBERATE,
        required_params=(),
        optional_params={"constraint": ""},
        template_id="deliberate",
        model_alias="default",
    ),
    PrimitiveKind.GOVERN: Registration(
        PrimitiveKind.GOVERN,
        required_params=(),
        template_id="govern",
        model_alias="default",
    ),
    PrimitiveKind.GENERATE: Registration(
        PrimitiveKind.GENERATE,
        required_params=(),
        optional_params={"format": "determination_notice"},
        template_id="generate",
        model_alias="default",
    ),
}


def registry_lookup(kind) -> Registration:
    if isinstance(kind, str):
        try:
            kind = PrimitiveKind(kind)
        except ValueError:
            raise UnknownPrimitive(kind) from None
    registration = _REGISTRY.get(kind)
    if registration is None:
        raise UnknownPrimitive(str(kind))
    return registration
