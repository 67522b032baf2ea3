"""Exception hierarchy shared by every harness package."""

from typing import List, Optional


class HarnessError(Exception):
    """Base class for all harness errors."""

    exit_code = 1


class ValidationFailure(HarnessError):
    """Input failed structural or semantic validation."""

    exit_code = 1


class HarnessIOError(HarnessError):
    """A file or remote provider could not be read, written or parsed."""

    exit_code = 2


class InfeasibleError(HarnessError):
    """The request is well-formed but cannot be satisfied in the given scene."""

    exit_code = 3


class ScriptValidationError(ValidationFailure):
    """A short script violates one or more invariants."""

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        """Initialize with the list of violated invariants."""
        self.violations = list(violations or [])
        detail = "; ".join(self.violations)
        super().__init__(f"{message}: {detail}" if detail else message)


class SceneFormatError(ValidationFailure):
    """Scene file does not match the schema."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        """Initialize with JSON-path diagnostics."""
        self.diagnostics = list(diagnostics or [])
        detail = "; ".join(self.diagnostics)
        super().__init__(f"{message}: {detail}" if detail else message)


class ConfigError(ValidationFailure):
    """Episode configuration is invalid."""


class UnregisteredSkillError(ValidationFailure):
    """No policy is registered for a skill."""

    def __init__(self, skill: str):
        """Initialize with the offending skill name."""
        self.skill = skill
        super().__init__(f"no policy registered for skill '{skill}'")


class EmbeddingDimensionError(ValidationFailure):
    """Two embedding vectors have different dimensions."""


class DegenerateEmbeddingError(ValidationFailure):
    """A zero vector cannot be normalized."""

    def __init__(self) -> None:
        """Initialize with the fixed message."""
        super().__init__("degenerate embedding")


class MetricInputError(ValidationFailure):
    """Metric inputs are too few, mismatched or non-finite."""


class RewardRangeError(ValidationFailure):
    """A reward term passed to combine lies outside [0, 1]."""


class ScriptDbFormatError(HarnessIOError):
    """Malformed record in a script database file."""

    def __init__(self, path: str, line_number: int, reason: str):
        """Initialize with the file path and 1-based line number."""
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {reason}")


class TraceFormatError(HarnessIOError):
    """Malformed execution trace file."""


class ProviderError(HarnessIOError):
    """An embedding or narrative provider failed."""


class UnsatisfiablePlanError(InfeasibleError):
    """No retrieved script can be realised in the scene."""

    def __init__(self, missing_categories: List[str]):
        """Initialize with the object categories missing from the scene."""
        self.missing_categories = sorted(set(missing_categories))
        super().__init__(
            "unsatisfiable plan: scene lacks "
            + (", ".join(self.missing_categories) or "compatible objects")
        )


class SceneTooCrowdedError(InfeasibleError):
    """Spawn rejection sampling exhausted its budget."""

    def __init__(self, attempts: int):
        """Initialize with the number of rejected samples."""
        self.attempts = attempts
        super().__init__(f"scene too crowded: {attempts} spawn samples rejected")


class InfeasibleGoalError(InfeasibleError):
    """A goal condition cannot be constructed."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to a CLI exit code."""
    if isinstance(error, HarnessError):
        return error.exit_code
    if isinstance(error, OSError):
        return 2
    return 1
