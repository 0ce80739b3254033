"""
Exception types shared across msfseg
"""


class MSFSegError(Exception):
    """Base class for all msfseg errors"""


class ContractViolation(MSFSegError):
    """A caller broke an operation's precondition"""


class InconsistentStateError(MSFSegError):
    """An internal invariant does not hold"""


class ConfigError(MSFSegError, ValueError):
    """Malformed or unknown configuration"""


class ArrayFormatError(MSFSegError, ValueError):
    """An LWA1 container or model file could not be decoded"""


class TrainingDivergedError(MSFSegError):
    """Raised when a training step produces a non-finite gradient"""

    def __init__(self, step: int, image_id: str, detail: str):
        self.step = step
        self.image_id = image_id
        super().__init__(f"Non-finite gradient at step {step} (image {image_id}): {detail}")
