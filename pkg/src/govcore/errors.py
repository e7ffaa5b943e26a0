"""Exception types shared across the substrate."""


class GovcoreError(Exception):
    """Base class for all substrate errors."""


# -- kernel ------------------------------------------------------------------

class MultipleActive(GovcoreError):
    """Two components reported time_advance=0; the model is malformed."""


class UnknownTarget(GovcoreError):
    """Injection targeted a component that is not part of the model."""


class IllegalPhase(GovcoreError):
    """Injection targeted a component that is not awaiting a result."""


class StepLimitExceeded(GovcoreError):
    """The kernel-level safety cap on executed steps was reached."""


# -- primitives --------------------------------------------------------------

class UnknownPrimitive(GovcoreError):
    """Requested primitive kind is not in the registry."""


class MissingParameter(GovcoreError):
    """A registry-required step parameter was not supplied."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required parameter: {name}")


class ParseFailure(GovcoreError):
    """No salvage stage produced schema-valid JSON.

    Carries the per-stage diagnostics so a retry prompt can include them.
    """

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


class SchemaViolation(GovcoreError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class VocabularyViolation(GovcoreError):
    """A deliberate output named a governance routing term as a disposition."""


# -- epistemic ---------------------------------------------------------------

class TriggerParseError(GovcoreError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at token {position})")


# -- governance / orchestration ----------------------------------------------

class MissingDeliberate(GovcoreError):
    """Governance was evaluated without any deliberate output on record."""


class IllegalChoice(GovcoreError):
    """The model chooser picked a primitive outside the legal set."""


class ConstraintViolation(GovcoreError):
    """A hard trajectory constraint cannot be satisfied."""


# -- hitl --------------------------------------------------------------------

class IllegalStateTransition(GovcoreError):
    def __init__(self, from_state: str, to_state: str):
        self.from_state = from_state
        self.to_state = to_state
        super().__init__(f"illegal transition: {from_state} -> {to_state}")


class UnauthorizedActor(GovcoreError):
    """Actor lacks the role required for the requested transition."""


# -- ledger ------------------------------------------------------------------

class SerializationError(GovcoreError):
    """Content is outside the canonical value domain."""


class StorageError(GovcoreError):
    """The ledger could not be durably persisted."""


# -- config ------------------------------------------------------------------

class ConfigError(GovcoreError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class CaseSchemaError(GovcoreError):
    """Case input does not satisfy the domain's case schema."""


# -- llm gateway -------------------------------------------------------------

class ScriptExhausted(GovcoreError):
    def __init__(self, case_id: str, step: str):
        self.case_id = case_id
        self.step = step
        super().__init__(f"script for {case_id} exhausted at {step}")


class ScriptMismatch(GovcoreError):
    """The requested primitive does not match the next scripted step."""


class ExhaustedRetries(GovcoreError):
    """Every completion attempt failed to parse; step fails."""

    def __init__(self, attempts: int, last: ParseFailure):
        self.attempts = attempts
        self.last = last
        super().__init__(f"no valid output after {attempts} attempts")
